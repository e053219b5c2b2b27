//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::fs;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use surfdyn::canon::{branched_lift_index, condense, IndexSpec};
use surfdyn::document::GraphDocument;
use surfdyn::graph::JunctionKind;
use surfdyn::nielsen::{analyze, base_relations, close_relations};
use surfdyn::shadow::{
    boundary_rotations, flip_annulus_experiment, linear_periodic_points, run_matching, sample_pairs,
    semiconjugacy_check, two_sided_bound_check, verify_expansion, winding_index, FlowParams, LinearModel,
    LocalModel, PerturbedMap, RotationProfile, FLIP_ITERATIONS,
};

const CAT: [[i64; 2]; 2] = [[2, 1], [1, 1]];
const EPS: f64 = 0.05;
const SEED: u64 = 1;
const GRID: usize = 256;
const MAX_PERIOD: u32 = 8;
const NEWTON_TOL: f64 = 1e-10;
const MAX_INDEX_PERIOD: u64 = 12;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn timed(limit: Duration, start: Instant, detail: String) -> Verdict {
    let took = start.elapsed();
    if took < limit {
        Ok(format!("{detail}; {:.2}s", took.as_secs_f64()))
    } else {
        Err(format!("{detail}; took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn perturbed() -> PerturbedMap {
    PerturbedMap::seeded(LinearModel::new(CAT).unwrap(), EPS, SEED).unwrap()
}

fn expansion() -> Verdict {
    let start = Instant::now();
    let report = verify_expansion(&LinearModel::cat_map(), &sample_pairs(7, 10_000, 10.0));
    let detail = format!(
        "max relative error {:.2e} / {:.2e}",
        report.max_unstable_error, report.max_stable_error
    );
    if report.samples != 10_000 || report.max_unstable_error > 1e-12 || report.max_stable_error > 1e-12 {
        return Err(detail);
    }
    timed(Duration::from_secs(1), start, detail)
}

fn shadowing_bound() -> Verdict {
    let start = Instant::now();
    let f = perturbed();
    let params = f.shadowing_params(GRID).map_err(|e| e.to_string())?;
    let report = run_matching(&f, &params, MAX_PERIOD, NEWTON_TOL).map_err(|e| e.to_string())?;
    for n in 1..=MAX_PERIOD {
        let oracle = common::periodic_count_oracle(CAT, n);
        let enumerated = linear_periodic_points(&LinearModel::new(CAT).unwrap(), n).unwrap().count;
        if report.counts[&n] != oracle || enumerated != oracle {
            return Err(format!("period {n}: {} matched, {enumerated} enumerated, oracle {oracle}", report.counts[&n]));
        }
    }
    let detail = format!(
        "{} points at n=8 (oracle), max d_phi {:.3e} < C = {:.4}, {} unmatched",
        report.counts[&8], report.max_dphi, params.c, report.unmatched
    );
    if !report.passed() {
        return Err(detail);
    }
    timed(Duration::from_secs(60), start, detail)
}

fn two_sided() -> Verdict {
    let start = Instant::now();
    let f = perturbed();
    let params = f.shadowing_params(GRID).map_err(|e| e.to_string())?;
    let report = run_matching(&f, &params, MAX_PERIOD, NEWTON_TOL).map_err(|e| e.to_string())?;
    let pairs = report.distinct_pairs();
    let two = two_sided_bound_check(&f, &pairs, -20..=20, params.c);
    let detail = format!(
        "{} points, {} comparisons, max gap {:.3e} <= 2C = {:.4}",
        two.pairs, two.comparisons, two.max_gap, two.bound
    );
    if !two.passed {
        return Err(detail);
    }
    timed(Duration::from_secs(60), start, detail)
}

fn semiconjugacy() -> Verdict {
    let f = perturbed();
    let params = f.shadowing_params(GRID).map_err(|e| e.to_string())?;
    let report = run_matching(&f, &params, MAX_PERIOD, NEWTON_TOL).map_err(|e| e.to_string())?;
    let semi = semiconjugacy_check(&f, &report.distinct_pairs(), params.c).map_err(|e| e.to_string())?;
    let detail = format!(
        "max defect {:.2e}, lift deviation {:.3e} (C = {:.4})",
        semi.max_defect, semi.max_lift_deviation, semi.c
    );
    if semi.max_defect < 1e-6 && semi.within_bound {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn flip_rotations() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 1..=10 {
        let r = boundary_rotations(&RotationProfile::random(seed), FLIP_ITERATIONS).map_err(|e| e.to_string())?;
        worst = worst.max(r.defect);
    }
    let detail = format!("10 maps, N = {FLIP_ITERATIONS}, max |rho(b-1) + rho(b1)| = {worst:.2e}");
    if worst < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn flip_fixed_points() -> Verdict {
    let mut lines = Vec::new();
    for seed in 1..=3 {
        let report = flip_annulus_experiment(FlowParams::default(), RotationProfile::random(seed))
            .map_err(|e| e.to_string())?;
        if !report.two_nonzero_fixed_points() {
            return Err(format!("seed {seed}: {:?}", report.fixed_points));
        }
        lines.push(format!("seed {seed} ok"));
    }
    Ok(format!("two interior fixed points of index +1, sum 2 ({})", lines.join(", ")))
}

fn closure_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..200 {
        let rels = common::random_relations(&mut rng, 12);
        let closed = close_relations(&rels).map_err(|e| format!("case {case}: {e}"))?;
        let (pn, col) = common::naive_closure(&rels);
        let got_col: common::Edges = closed.collapse.keys().copied().collect();
        if closed.pn != pn || got_col != col {
            return Err(format!("case {case} differs: {rels:?}"));
        }
    }
    Ok("200 random generator sets agree".into())
}

fn condensed_properties() -> Verdict {
    let corpus = common::corpus();
    for (name, doc) in &corpus {
        let c = common::condensed(doc);
        let base = base_relations(&c, MAX_INDEX_PERIOD).map_err(|e| format!("{name}: {e}"))?;
        if !base.is_empty() {
            return Err(format!("{name}: base relations {base:?}"));
        }
        let report = analyze(&c, MAX_INDEX_PERIOD, None).map_err(|e| format!("{name}: {e}"))?;
        if let Some(r) = report.inventory.records.iter().find(|r| r.index.is_nonzero() != Some(true)) {
            return Err(format!("{name}: orbit {} has index {}", r.id, r.index));
        }
        for class in &report.classes {
            if class.collapsible || class.essential != Some(true) || class.members.len() != 1 {
                return Err(format!("{name}: class {class:?}"));
            }
        }
        let again = condense(&c.as_adjusted()).map_err(|e| format!("{name}: {e}"))?;
        if GraphDocument::from_condensed(&again).to_json() != GraphDocument::from_condensed(&c).to_json() {
            return Err(format!("{name}: condense is not idempotent"));
        }
    }
    Ok(format!("{} corpus graphs", corpus.len()))
}

fn lift_indices() -> Verdict {
    let mut sweep = Vec::new();
    for h in 0..=20u32 {
        for p in 0..=20u32 {
            if (h + p) % 2 != 0 {
                continue;
            }
            for k in 2..=12 {
                for rotated in [false, true] {
                    let spec = IndexSpec::branched(h, p, k, rotated);
                    if branched_lift_index(&spec).map_err(|e| e.to_string())? == 0 {
                        return Err(format!("zero index at {spec:?}"));
                    }
                    sweep.push(spec);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sample: Vec<IndexSpec> = sweep.choose_multiple(&mut rng, 20).copied().collect();
    for spec in &sample {
        let model = LocalModel::new(*spec);
        let w = winding_index(|z| model.map(z), [0.0, 0.0], 1.0, 1 << 14).map_err(|e| format!("{spec:?}: {e}"))?;
        let expected = branched_lift_index(spec).unwrap();
        if w != expected {
            return Err(format!("{spec:?}: winding {w}, closed form {expected}"));
        }
    }
    Ok(format!("{} sweep cases nonzero, 20 local models agree", sweep.len()))
}

fn bouquet_hub() -> Verdict {
    let dir = common::corpus_dir();
    let doc = GraphDocument::parse(&fs::read_to_string(dir.join("bouquet_hub.json")).unwrap()).map_err(|e| e.to_string())?;
    let c = common::condensed(&doc);
    if !c.graph.annuli.is_empty() {
        return Err(format!("{} annuli left", c.graph.annuli.len()));
    }
    if c.graph.junctions.len() != 3
        || !c
            .graph
            .junctions
            .iter()
            .all(|j| j.kind == JunctionKind::Bouquet { center: Some(0) })
    {
        return Err(format!("junctions {:?}", c.graph.junctions));
    }
    let report = analyze(&c, 6, None).map_err(|e| e.to_string())?;
    let records = &report.inventory.records;
    let ok = records.len() == 1
        && records[0].kind.to_string() == "fo_branch"
        && records[0].period == 1
        && records[0].index.to_string() == "1"
        && records[0].carrier.to_string() == "N0"
        && records[0].absorbed.len() == 2
        && records[0]
            .absorbed
            .iter()
            .all(|a| a.kind.to_string() == "peripheral_pa" && a.period == 2);
    if !ok {
        return Err(format!("inventory {records:?}"));
    }
    let expected = fs::read_to_string(dir.join("bouquet_hub.expected.json")).unwrap();
    if GraphDocument::from_condensed(&c).to_json() != expected {
        return Err("condensed document differs from bouquet_hub.expected.json".into());
    }
    Ok("annuli eliminated, peripheral orbits absorbed into the branch class, fixture matches".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("expansion of d_u and d_s", expansion),
        ("shadowing bound d_phi < C", shadowing_bound),
        ("two-sided orbit bound 2C", two_sided),
        ("semiconjugacy on the matched set", semiconjugacy),
        ("flip boundary rotations cancel", flip_rotations),
        ("flip interior fixed points", flip_fixed_points),
        ("closure matches naive fixpoint", closure_oracle),
        ("condensed corpus properties", condensed_properties),
        ("branched lift index nonvanishing", lift_indices),
        ("bouquet hub regression", bouquet_hub),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
