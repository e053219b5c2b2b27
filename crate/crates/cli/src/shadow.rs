use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use surfdyn::shadow::{
    flip_annulus_experiment, run_matching, sample_pairs, semiconjugacy_check, shadowing_constant,
    two_sided_bound_check, verify_expansion, CircleLift, FlowParams, IntMatrix, LinearModel, MatchReport,
    PerturbedMap, RotationProfile,
};

use crate::{to_json, Failure, Format, Outcome};

#[derive(Subcommand)]
pub enum Experiment {
    /// d_u grows by λ under the map and d_s under its inverse.
    Expansion {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// C = 2(R + 1)/(λ - 1).
    Constant {
        #[arg(long)]
        r: f64,
        /// Expansion constant; defaults to the leading eigenvalue of --matrix.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value = "2,1,1,1")]
        matrix: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Continue linear periodic points to the perturbed map and compare with C.
    Match {
        #[command(flatten)]
        common: Common,
        /// Also write the matched pairs as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare d_Φ along forward and backward orbits of all matched pairs.
    Twosided {
        #[command(flatten)]
        common: Common,
        /// Iterates m range over [-M, M].
        #[arg(long, default_value_t = 20)]
        m_max: i32,
    },
    /// Check that matching conjugates the perturbed map to the linear one.
    Semiconj {
        #[command(flatten)]
        common: Common,
    },
    /// Boundary rotations and interior fixed points of boundary-interchanging annulus maps.
    Flip {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Rigid boundary maps instead of random ones: upper shift, lower shift 0.
        #[arg(long)]
        rigid: Option<String>,
        #[arg(long, default_value_t = 0.15)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 64)]
        steps: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
pub struct Common {
    /// Entries a,b,c,d of [[a,b],[c,d]].
    #[arg(long, default_value = "2,1,1,1")]
    matrix: String,
    /// Lipschitz size of the perturbation.
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 8)]
    max_period: u32,
    /// Newton residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sampling grid for the displacement bound R.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_matrix(s: &str) -> Result<IntMatrix, Failure> {
    let entries: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--matrix expects four integers a,b,c,d, got `{s}`")))?;
    match entries[..] {
        [a, b, c, d] => Ok([[a, b], [c, d]]),
        _ => Err(Failure::usage(format!("--matrix expects four integers a,b,c,d, got `{s}`"))),
    }
}

fn parse_fraction(s: &str) -> Result<f64, Failure> {
    let bad = || Failure::usage(format!("expected a number or p/q, got `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

impl Common {
    fn model(&self) -> Result<LinearModel, Failure> {
        Ok(LinearModel::new(parse_matrix(&self.matrix)?)?)
    }

    fn matched(&self) -> Result<(PerturbedMap, MatchReport), Failure> {
        let f = PerturbedMap::seeded(self.model()?, self.eps, self.seed)?;
        let params = f.shadowing_params(self.grid)?;
        let report = run_matching(&f, &params, self.max_period, self.tol)?;
        Ok((f, report))
    }
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => print!("{}", to_json(value)),
        Format::Text | Format::Dot => print!("{}", text()),
    }
}

fn verdict(passed: bool, what: &str) -> Outcome {
    if passed {
        Ok(())
    } else {
        Err(Failure::check(format!("{what} failed")))
    }
}

#[derive(Serialize)]
struct MatchSummary<'a> {
    #[serde(flatten)]
    report: &'a MatchReport,
    passed: bool,
}

#[derive(Serialize)]
struct CsvRow {
    n: u32,
    least_period: u32,
    x: String,
    y: String,
    x_lift_0: f64,
    x_lift_1: f64,
    y_lift_0: f64,
    y_lift_1: f64,
    du: f64,
    ds: f64,
    dphi: f64,
    residual: f64,
    matched: bool,
}

fn write_csv(path: &PathBuf, report: &MatchReport) -> Outcome {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    for p in &report.pairs {
        w.serialize(CsvRow {
            n: p.n,
            least_period: p.least_period,
            x: p.linear[0].to_string(),
            y: p.linear[1].to_string(),
            x_lift_0: p.linear_lift[0],
            x_lift_1: p.linear_lift[1],
            y_lift_0: p.perturbed_lift[0],
            y_lift_1: p.perturbed_lift[1],
            du: p.separation.du,
            ds: p.separation.ds,
            dphi: p.separation.dphi,
            residual: p.residual,
            matched: p.matched,
        })
        .map_err(|e| Failure::usage(e.to_string()))?;
    }
    w.flush().map_err(|e| Failure::usage(e.to_string()))
}

pub fn run(experiment: Experiment) -> Outcome {
    match experiment {
        Experiment::Expansion { common, samples } => {
            let model = common.model()?;
            let report = verify_expansion(&model, &sample_pairs(common.seed, samples, 10.0));
            emit(common.format, &report, || {
                format!(
                    "lambda {}\nsamples {}\nmax relative error unstable {:.3e} stable {:.3e} (tolerance {:.0e})\n{}\n",
                    report.lambda,
                    report.samples,
                    report.max_unstable_error,
                    report.max_stable_error,
                    report.tolerance,
                    if report.passed { "pass" } else { "FAIL" }
                )
            });
            verdict(report.passed, "expansion check")
        }
        Experiment::Constant {
            r,
            lambda,
            matrix,
            format,
        } => {
            let lambda = match lambda {
                Some(l) => l,
                None => LinearModel::new(parse_matrix(&matrix)?)?.lambda,
            };
            let c = shadowing_constant(r, lambda)?;
            #[derive(Serialize)]
            struct Out {
                r: f64,
                lambda: f64,
                c: f64,
            }
            emit(format, &Out { r, lambda, c }, || format!("R {r}\nlambda {lambda}\nC {c}\n"));
            Ok(())
        }
        Experiment::Match { common, csv } => {
            let (_, report) = common.matched()?;
            if let Some(path) = &csv {
                write_csv(path, &report)?;
            }
            let passed = report.passed();
            emit(common.format, &MatchSummary { report: &report, passed }, || {
                let mut s = format!(
                    "lambda {}\nR {}\nC {}\n",
                    report.params.lambda, report.params.r, report.params.c
                );
                for (n, count) in &report.counts {
                    s.push_str(&format!("period {n}: {count} points\n"));
                }
                s.push_str(&format!(
                    "unmatched {}\nviolations {}\nmax d_phi {}\nmargin {}\n{}\n",
                    report.unmatched,
                    report.violations,
                    report.max_dphi,
                    report.margin,
                    if passed { "pass" } else { "FAIL" }
                ));
                s
            });
            verdict(passed, "shadowing bound")
        }
        Experiment::Twosided { common, m_max } => {
            let (f, report) = common.matched()?;
            let pairs = report.distinct_pairs();
            let two = two_sided_bound_check(&f, &pairs, -m_max..=m_max, report.params.c);
            emit(common.format, &two, || {
                format!(
                    "pairs {}\nm in [{}, {}]\nmax gap {}\nbound 2C {}\nviolations {}\n{}\n",
                    two.pairs,
                    two.m_min,
                    two.m_max,
                    two.max_gap,
                    two.bound,
                    two.violations,
                    if two.passed { "pass" } else { "FAIL" }
                )
            });
            verdict(two.passed, "two-sided bound")
        }
        Experiment::Semiconj { common } => {
            let (f, report) = common.matched()?;
            let pairs = report.distinct_pairs();
            let semi = semiconjugacy_check(&f, &pairs, report.params.c)?;
            let passed = semi.max_defect < 1e-6 && semi.within_bound;
            emit(common.format, &semi, || {
                format!(
                    "pairs {}\nmax defect {:.3e}\nmax lookup gap {:.3e}\nmax lift deviation {} (C = {})\n{}\n",
                    semi.pairs,
                    semi.max_defect,
                    semi.max_lookup_gap,
                    semi.max_lift_deviation,
                    semi.c,
                    if passed { "pass" } else { "FAIL" }
                )
            });
            verdict(passed, "semiconjugacy check")
        }
        Experiment::Flip {
            seed,
            rigid,
            kappa,
            mu,
            steps,
            format,
        } => {
            let profile = match rigid {
                Some(s) => RotationProfile {
                    upper: CircleLift::rigid(parse_fraction(&s)?),
                    lower: CircleLift::rigid(0.0),
                },
                None => RotationProfile::random(seed),
            };
            let report = flip_annulus_experiment(FlowParams { kappa, mu, steps }, profile)?;
            let passed = report.rotations.defect < 1e-6 && report.two_nonzero_fixed_points();
            emit(format, &report, || {
                let mut s = format!(
                    "rotation upper {:.9}\nrotation lower {:.9}\nsum {:.3e}\n",
                    report.rotations.upper, report.rotations.lower, report.rotations.defect
                );
                match &report.fixed_points {
                    surfdyn::shadow::FixedPointCertificate::Certified { points, index_sum } => {
                        for p in points {
                            s.push_str(&format!(
                                "fixed point ({:.6}, {:.6}) index {}\n",
                                p.point[0], p.point[1], p.index
                            ));
                        }
                        s.push_str(&format!("index sum {index_sum}\n"));
                    }
                    surfdyn::shadow::FixedPointCertificate::Inconclusive { hint, .. } => {
                        s.push_str(&format!("inconclusive: {hint}\n"));
                    }
                }
                s.push_str(if passed { "pass\n" } else { "FAIL\n" });
                s
            });
            verdict(passed, "flip annulus experiment")
        }
    }
}
