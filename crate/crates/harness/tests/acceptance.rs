//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ownbm::edge_weighted::{valuation, EdgePipeline};
use ownbm::generators::{GeneratorConfig, WeightDist};
use ownbm::oracle::{self, enumerate_matchings_capped, OracleConfig};
use ownbm::random::{seeded, Scripted};
use ownbm::vertex_weighted::{Branch, VertexPipeline};
use ownbm::{ExactInstance, Instance, RandomSource, Rational64, WeightMode};
use ownbm_harness::{run_experiment, ExperimentConfig, ExperimentReport, PipelineChoice, Source};
use rayon::prelude::*;

const SLACK: f64 = 1e-9;
const INT_WEIGHTS: WeightDist = WeightDist::UniformInt { lo: 1, hi: 10 };

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

struct Suite {
    failures: usize,
    /// Deadline violations seen by criteria 1 to 5.
    deadline_violations: usize,
    runs_audited: u64,
}

impl Suite {
    fn check(&mut self, id: u32, title: &str, budget: Duration, f: impl FnOnce(&mut Self) -> Verdict) {
        let start = Instant::now();
        let v = f(self);
        let took = start.elapsed();
        let in_time = took <= budget;
        let ok = v.ok && in_time;
        if !ok {
            self.failures += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        let late = if in_time { String::new() } else { format!(", over the {budget:?} budget") };
        println!("[{tag}] criterion {id}: {title}: {} ({:.1}s{late})", v.detail, took.as_secs_f64());
    }
}

fn pick<T: Copy>(rng: &mut impl RandomSource, xs: &[T]) -> T {
    xs[((rng.unit() * xs.len() as f64) as usize).min(xs.len() - 1)]
}

/// The 500 edge-mode instances of criteria 1 and 3.
fn criterion_one_configs() -> Vec<GeneratorConfig> {
    let mut rng = seeded(0x0c1);
    (0..500u64)
        .map(|k| {
            let n = pick(&mut rng, &[2usize, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
            let d = pick(&mut rng, &[1usize, 2, 3, n]);
            let p = pick(&mut rng, &[0.3, 0.6, 1.0]);
            GeneratorConfig::random(n, d, p, WeightMode::Edge, INT_WEIGHTS, 10_000 + k)
        })
        .collect()
}

fn vertex_configs(count: u64, max_n: usize, salt: u64) -> Vec<GeneratorConfig> {
    let mut rng = seeded(salt);
    let sizes: Vec<usize> = (2..=max_n).collect();
    (0..count)
        .map(|k| {
            let n = pick(&mut rng, &sizes);
            let d = pick(&mut rng, &[1usize, 2, 3, n]);
            let p = pick(&mut rng, &[0.3, 0.6, 1.0]);
            GeneratorConfig::random(n, d, p, WeightMode::Vertex, INT_WEIGHTS, salt * 1_000 + k)
        })
        .collect()
}

fn exact(inst: &Instance) -> ExactInstance {
    inst.cast().expect("integer weights are exact")
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / count;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

fn criterion_1(suite: &mut Suite) -> Verdict {
    let configs = criterion_one_configs();
    let results: Vec<(bool, bool, f64, usize)> = configs
        .par_iter()
        .map(|cfg| {
            let inst = cfg.generate().unwrap();
            let ex = exact(&inst);
            let opt = oracle::opt(&ex, &OracleConfig::auto()).unwrap().weight;
            let run = EdgePipeline::new(&ex).unwrap().run(cfg.seed).unwrap();
            let exact_ok = run.semi_weight * Rational64::from_integer(2) >= opt;
            let float_opt = oracle::opt(&inst, &OracleConfig::auto()).unwrap().weight;
            let float_run = EdgePipeline::new(&inst).unwrap().run(cfg.seed).unwrap();
            let float_ok = float_run.semi_weight >= 0.5 * float_opt - SLACK;
            let ratio = if float_opt > 0.0 { float_run.semi_weight / float_opt } else { 1.0 };
            (exact_ok, float_ok, ratio, run.deadline_violations(inst.d) + float_run.deadline_violations(inst.d))
        })
        .collect();
    suite.deadline_violations += results.iter().map(|r| r.3).sum::<usize>();
    suite.runs_audited += 2 * results.len() as u64;
    let bad = results.iter().filter(|r| !(r.0 && r.1)).count();
    let min = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    verdict(
        bad == 0,
        format!("{} instances, {bad} below OPT/2, min semi/OPT {min:.4}", results.len()),
    )
}

fn criterion_2(suite: &mut Suite) -> Verdict {
    const SEEDS: u64 = 20_000;
    let mut worst_z: f64 = 0.0;
    let mut worst_freq: f64 = 0.5;
    let mut bad = 0;
    let mut edges = 0;
    for k in 0..20u64 {
        let n = 6 + (k as usize % 7);
        let d = 1 + (k as usize % 4);
        let inst = GeneratorConfig::random(n, d, 0.6, WeightMode::Edge, INT_WEIGHTS, 20_000 + k).generate().unwrap();
        let p = EdgePipeline::new(&inst).unwrap();
        let runs: Vec<_> = (0..SEEDS).into_par_iter().map(|s| p.run(s).unwrap()).collect();
        let semi = &runs[0].semi;
        let (mean, se) = mean_and_se(runs.iter().map(|r| r.matching_weight));
        let target = runs[0].semi_weight / 2.0;
        let z = if se > 0.0 { (mean - target).abs() / se } else if mean == target { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
        let mut ok = z <= 3.0 && runs.iter().all(|r| &r.semi == semi);
        for e in &semi.entries {
            let kept = runs
                .iter()
                .filter(|r| r.matching.entries.iter().any(|m| (m.origin, m.terminal) == (e.origin, e.terminal)))
                .count();
            let f = kept as f64 / SEEDS as f64;
            if (f - 0.5).abs() > (worst_freq - 0.5).abs() {
                worst_freq = f;
            }
            ok &= (0.48..=0.52).contains(&f);
            edges += 1;
        }
        suite.deadline_violations += runs.iter().map(|r| r.deadline_violations(inst.d)).sum::<usize>();
        suite.runs_audited += SEEDS;
        if !ok {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("20 instances x {SEEDS} seeds, {edges} edges, worst |z| {worst_z:.2}, worst frequency {worst_freq:.4}"),
    )
}

fn audit(suite: &mut Suite, report: &ExperimentReport) {
    suite.deadline_violations += report.deadline_violations();
    suite.runs_audited += report.rows.len() as u64;
}

fn criterion_3(suite: &mut Suite) -> Verdict {
    const TRIALS: u64 = 20_000;
    let mut bad = 0;
    let mut min_ratio = f64::INFINITY;
    let configs = criterion_one_configs();
    for cfg in &configs {
        let exp = ExperimentConfig::new(vec![Source::Gen(cfg.clone())], PipelineChoice::Edge, TRIALS, cfg.seed);
        let report = run_experiment(&exp).unwrap();
        audit(suite, &report);
        let u = &report.units[0];
        if let Some(r) = u.aggregate.ratio_mean.value() {
            min_ratio = min_ratio.min(r);
        }
        if u.aggregate.mean < 0.25 * u.opt - 3.0 * u.aggregate.std_error {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{} instances x {TRIALS} trials, {bad} below floor, min mean/OPT {min_ratio:.4}", configs.len()),
    )
}

/// Criteria 4 and 5 share their trials.
struct VertexOutcome {
    below: usize,
    min_ratio: f64,
    dominance_failures: usize,
    validation_failures: usize,
    instances: usize,
}

fn vertex_batch(suite: &mut Suite) -> VertexOutcome {
    const TRIALS: u64 = 20_000;
    let floor = 0.5 * (1.0 - (-1.0f64).exp());
    let mut out = VertexOutcome {
        below: 0,
        min_ratio: f64::INFINITY,
        dominance_failures: 0,
        validation_failures: 0,
        instances: 0,
    };
    for cfg in vertex_configs(200, 12, 4) {
        let exp = ExperimentConfig::new(vec![Source::Gen(cfg.clone())], PipelineChoice::Vertex, TRIALS, cfg.seed);
        let report = run_experiment(&exp).unwrap();
        audit(suite, &report);
        let u = &report.units[0];
        let (mean, se) = mean_and_se(report.rows.iter().map(|r| r.half_weight.unwrap()));
        if mean < floor * u.opt - 3.0 * se {
            out.below += 1;
        }
        if u.opt > 0.0 {
            out.min_ratio = out.min_ratio.min(mean / u.opt);
        }
        out.dominance_failures += report.rows.iter().filter(|r| r.final_weight < r.half_weight.unwrap()).count();
        out.validation_failures += u.validation_failures;
        out.instances += 1;
    }
    out
}

fn criterion_7(_: &mut Suite) -> Verdict {
    let mut rng = seeded(7);
    let configs: Vec<GeneratorConfig> = (0..200u64)
        .map(|k| {
            let n = pick(&mut rng, &[2usize, 3, 4, 5, 6, 7, 8, 9, 10]);
            let d = pick(&mut rng, &[1usize, 2, 3, n]);
            let p = pick(&mut rng, &[0.3, 0.6, 1.0]);
            let mode = if k % 2 == 0 { WeightMode::Edge } else { WeightMode::Vertex };
            GeneratorConfig::random(n, d, p, mode, INT_WEIGHTS, 70_000 + k)
        })
        .collect();
    let mismatches: usize = configs
        .par_iter()
        .map(|cfg| {
            let inst = exact(&cfg.generate().unwrap());
            let full = OracleConfig::exhaustive_uncapped();
            let exhaustive = oracle::opt(&inst, &full).unwrap().weight;
            let bnb = oracle::opt(&inst, &OracleConfig::branch_and_bound()).unwrap().weight;
            let g = inst.index().unwrap();
            let direct = enumerate_matchings_capped(&inst, usize::MAX)
                .unwrap()
                .map(|m| {
                    m.iter()
                        .map(|&k| {
                            let e = &inst.edges[k];
                            match inst.mode {
                                WeightMode::Edge => e.weight.unwrap(),
                                WeightMode::Vertex => g.vertex_weight(e.origin) + g.vertex_weight(e.terminal),
                            }
                        })
                        .fold(Rational64::from_integer(0), |a, b| a + b)
                })
                .max()
                .unwrap_or_else(|| Rational64::from_integer(0));
            usize::from(exhaustive != bnb) + usize::from(exhaustive != direct)
        })
        .sum();
    verdict(mismatches == 0, format!("200 instances, {mismatches} disagreements"))
}

fn criterion_8(_: &mut Suite) -> Verdict {
    let mut rng = seeded(8);
    let mut violations = 0;
    for s in 0..10_000u64 {
        let n = pick(&mut rng, &[3usize, 5, 7, 9, 12]);
        let d = pick(&mut rng, &[1usize, 2, 3, n]);
        let p = pick(&mut rng, &[0.3, 0.6, 1.0]);
        let inst = exact(&GeneratorConfig::random(n, d, p, WeightMode::Edge, INT_WEIGHTS, 80_000 + s).generate().unwrap());
        let g = inst.index().unwrap();
        let items: Vec<usize> = (1..=n).collect();
        let bidder = pick(&mut rng, &items);
        let t: Vec<usize> = items.iter().copied().filter(|_| rng.coin()).collect();
        let sub: Vec<usize> = t.iter().copied().filter(|_| rng.coin()).collect();
        let outside: Vec<usize> = items.iter().copied().filter(|v| !t.contains(v)).collect();
        if outside.is_empty() {
            continue;
        }
        let k = pick(&mut rng, &outside);
        let gain = |set: &[usize]| {
            let mut with = set.to_vec();
            with.push(k);
            valuation(&g, bidder, &with).unwrap() - valuation(&g, bidder, set).unwrap()
        };
        if gain(&t) > gain(&sub) {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("10000 samples, {violations} violations"))
}

fn criterion_9(_: &mut Suite) -> Verdict {
    let running = Instance::edge_weighted(4, 2, [(2, 1, 5.0), (3, 1, 7.0), (3, 2, 4.0), (4, 2, 6.0), (4, 3, 3.0)]);
    let ex = exact(&running);
    let p = EdgePipeline::new(&ex).unwrap();
    let semi = p.run(0).unwrap().semi_weight;
    let opt = oracle::opt(&ex, &OracleConfig::default()).unwrap().weight;
    // at most n coins per run, so all 2^n strings weigh outcomes exactly
    let strings = 1u32 << running.n;
    let total = (0..strings)
        .map(|bits| {
            let coins: Vec<bool> = (0..running.n).map(|k| bits >> k & 1 == 1).collect();
            p.run_with(&mut Scripted::new(coins, [])).unwrap().matching_weight
        })
        .fold(Rational64::from_integer(0), |a, b| a + b);
    let expected = total / Rational64::from_integer(i64::from(strings));

    let a = exact(&Instance::vertex_weighted(3, 2, vec![10.0, 6.0, 8.0], [(2, 1), (3, 1), (3, 2)]));
    let vp = VertexPipeline::new(&a).unwrap();
    let dest = vp.run_with(&mut Scripted::new([false], [0.3, 0.7, 0.1])).unwrap();
    let orig = vp.run_with(&mut Scripted::new([true], [0.0; 5])).unwrap();
    let a_opt = oracle::opt(&a, &OracleConfig::default()).unwrap().weight;

    let int = Rational64::from_integer;
    let got = [semi, opt, expected, dest.half_weight, orig.half_weight, a_opt, dest.three_weight];
    let want = [int(12), int(13), int(6), int(16), int(8), int(18), int(24)];
    let ok = got == want && dest.branch == Branch::Destination && orig.branch == Branch::Origin;
    let shown: Vec<String> = got.iter().map(ToString::to_string).collect();
    verdict(
        ok,
        format!(
            "M' {} OPT {} E[w(M)] {}; A: destination {} origin {} OPT {} 3-matching {}",
            shown[0], shown[1], shown[2], shown[3], shown[4], shown[5], shown[6]
        ),
    )
}

fn main() {
    let minute = Duration::from_secs(60);
    let mut suite = Suite {
        failures: 0,
        deadline_violations: 0,
        runs_audited: 0,
    };
    suite.check(1, "semi-matching at least OPT/2", minute, criterion_1);
    suite.check(2, "rounding keeps half in expectation", 2 * minute, criterion_2);
    suite.check(3, "edge pipeline mean at least OPT/4", 5 * minute, criterion_3);
    let mut vertex = None;
    suite.check(4, "half-weight mean at least (1-1/e)/2 OPT", 10 * minute, |s| {
        let v = vertex_batch(s);
        let out = verdict(
            v.below == 0,
            format!(
                "{} instances x 20000 trials, {} below floor, min mean/OPT {:.4}",
                v.instances, v.below, v.min_ratio
            ),
        );
        vertex = Some(v);
        out
    });
    let vertex = vertex.expect("criterion 4 ran");
    suite.check(5, "3-matching dominates half-weight", minute, |_| {
        verdict(
            vertex.dominance_failures == 0 && vertex.validation_failures == 0,
            format!(
                "{} trials below half-weight, {} failed validation",
                vertex.dominance_failures, vertex.validation_failures
            ),
        )
    });
    suite.check(6, "deadline audit", minute, |s| {
        verdict(
            s.deadline_violations == 0,
            format!("{} runs, {} late events", s.runs_audited, s.deadline_violations),
        )
    });
    suite.check(7, "oracle self-consistency", minute, criterion_7);
    suite.check(8, "submodular valuations", minute, criterion_8);
    suite.check(9, "worked traces", minute, criterion_9);
    if suite.failures > 0 {
        println!("{} criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
