//! Acceptance criteria 1 through 9. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::time::Instant;

use sparse_bilinear::exponents::{decay_thresholds, region, ExponentTriple, RegionName};
use sparse_bilinear::verify::{
    continuity_suite, cz_suite, dyadic_suite, lemma_suite, multiplier_suite, operator_suite, scaling_suite,
    sparse_suite, SparseRatioConfig, SuiteReport,
};

type Outcome = Result<(bool, String), String>;

fn t(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> ExponentTriple {
    ExponentTriple::from_ratios(a, b, c)
}

fn sorted(mut v: Vec<ExponentTriple>) -> Vec<ExponentTriple> {
    v.sort();
    v
}

fn summarize(r: &SuiteReport) -> (bool, String) {
    let fails: Vec<String> = r
        .failures()
        .iter()
        .map(|c| format!("{}: {} vs {}", c.name, c.value, c.bound))
        .collect();
    let detail = if fails.is_empty() {
        format!("{} checks", r.checks.len())
    } else {
        format!("{} of {} checks failed [{}]", fails.len(), r.checks.len(), fails.join("; "))
    };
    (r.pass, detail)
}

fn suite(r: sparse_bilinear::Result<SuiteReport>) -> Outcome {
    r.map(|r| summarize(&r)).map_err(|e| e.to_string())
}

fn exact_polytopes() -> Outcome {
    let full = region(RegionName::TriangleFull, 10, Some(5)).map_err(|e| e.to_string())?;
    let six = sorted(vec![
        t((0, 1), (0, 1), (0, 1)),
        t((4, 5), (1, 10), (1, 10)),
        t((1, 10), (4, 5), (1, 10)),
        t((81, 101), (9, 101), (9, 101)),
        t((9, 101), (81, 101), (9, 101)),
        t((288, 535), (288, 535), (288, 535)),
    ]);
    let bis = region(RegionName::BisphereFull, 10, None).map_err(|e| e.to_string())?;
    let hull_a = sorted(vec![
        t((1, 1), (9, 10), (9, 10)),
        t((9, 10), (1, 1), (9, 10)),
        t((9, 10), (1, 1), (1, 10)),
        t((1, 1), (9, 10), (1, 10)),
        t((1, 1), (1, 10), (1, 10)),
        t((1, 10), (1, 1), (1, 10)),
        t((1, 10), (1, 10), (1, 10)),
        t((19, 20), (19, 20), (19, 20)),
    ]);
    let hull_b = sorted(vec![
        t((0, 1), (0, 1), (0, 1)),
        t((0, 1), (1, 1), (0, 1)),
        t((1, 1), (0, 1), (0, 1)),
        t((8, 9), (1, 1), (4, 45)),
        t((1, 1), (8, 9), (4, 45)),
        t((1, 1), (4, 45), (4, 45)),
        t((4, 45), (1, 1), (4, 45)),
        t((4, 45), (4, 45), (4, 45)),
    ]);
    let a = sorted(full.vertices()) == six && full.pieces.iter().all(|p| p.cross_check());
    let b = bis.pieces.len() == 2
        && sorted(bis.pieces[0].vertices.clone()) == hull_a
        && sorted(bis.pieces[1].vertices.clone()) == hull_b;
    Ok((a && b, format!("six-vertex hull {a}, two d=10 hulls {b}")))
}

fn sparse_both() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for cfg in [SparseRatioConfig::d1(100, 7), SparseRatioConfig::d2(100, 7)] {
        let (rep, refine) = sparse_suite(&cfg).map_err(|e| e.to_string())?;
        let (pass, detail) = summarize(&rep);
        ok &= pass;
        parts.push(format!(
            "d={}: max ratio {:.4} -> {:.4} (delta {:.3}), {}",
            cfg.dim, refine.coarse.max_ratio, refine.fine.max_ratio, refine.delta, detail
        ));
    }
    Ok((ok, parts.join(" | ")))
}

fn splitting() -> Outcome {
    let (pass, detail) = suite(multiplier_suite(11))?;
    let t2 = decay_thresholds(2).map_err(|e| e.to_string())?;
    Ok((pass, format!("{detail}; d=2 thresholds {} and {:?}", t2.first, t2.second.map(|v| v.to_string()))))
}

fn main() {
    let criteria: Vec<(u32, &str, f64, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "exact polytopes", 1.0, Box::new(exact_polytopes)),
        (2, "dyadic lattice suite", 10.0, Box::new(|| suite(dyadic_suite(1, 10_000)))),
        (3, "operator oracles", 60.0, Box::new(|| suite(operator_suite(3, 50)))),
        (4, "scaling law", 120.0, Box::new(|| suite(scaling_suite(5)))),
        (5, "continuity", 120.0, Box::new(|| suite(continuity_suite(17, 3)))),
        (6, "CZ and stopping", 120.0, Box::new(|| suite(cz_suite(9, 100, 25)))),
        (7, "end-to-end sparse domination", 600.0, Box::new(sparse_both)),
        (8, "lemma checks", 60.0, Box::new(|| suite(lemma_suite(13, 50)))),
        (9, "frequency splitting", 60.0, Box::new(splitting)),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (k, name, budget, run) in &criteria {
        if only.is_some_and(|o| o != *k) {
            continue;
        }
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok((p, d)) => (p && secs < *budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {k} ({name}): {} in {secs:.2}s (budget {budget}s) :: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
