//! Acceptance suite at desk scale: λ_c = 240/day, 150 days, 30-day warm-up,
//! 4 × 5 lattice, seeds 1..=10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use mlru_core::baselines::{CACHEABILITY, POP_BOUND};
use mlru_core::engine::{replay, run_sweep, DtPop, ExperimentConfig, RunOptions};
use mlru_core::metrics::{to_csv_string, MetricsRow};
use mlru_core::policies::{PolicyOutcome, StrategyRegistry, MULTI_LRU_ALL, MULTI_LRU_ONE, SINGLE_LRU};
use mlru_core::traffic::{
    make_shape, place_requests, sample_pareto, PopularityShape, ShapeKind, ShapeMix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u32 = 10;
const CATALOGUE_TOL: f64 = 0.05;
const REQUESTS_TOL: f64 = 0.02;
const PARETO_MEAN_TOL: f64 = 0.01;
const PARETO_DRAWS: usize = 1_000_000;
const KS_DRAWS: usize = 100_000;
/// Two-sided Kolmogorov critical value at the 1% level, scaled by √n.
const KS_CRIT_1PCT: f64 = 1.628;
const QUADRATURE_TOL: f64 = 1e-9;
const SE_MULTIPLE: f64 = 2.0;
const MIN_RELATIVE_GAIN: f64 = 0.10;
const SHAPE_GAP_POINTS: f64 = 0.02;

/// Mean and standard error of the mean across seeds.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn pooled_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn point(nbs: f64, capacity: usize, policies: &[&str]) -> ExperimentConfig {
    let mut c = ExperimentConfig::desk_scale(nbs, capacity, policies);
    c.seeds = (1..=SEEDS as u64).collect();
    c.label = format!("nbs={nbs} K={capacity}");
    c
}

fn sweep(points: &[ExperimentConfig]) -> Vec<MetricsRow> {
    run_sweep(points, &StrategyRegistry::standard(), None, RunOptions::default()).expect("sweep runs")
}

fn hit_probs<'a>(rows: &'a [MetricsRow], policy: &'a str) -> impl Fn(&dyn Fn(&MetricsRow) -> bool) -> Vec<f64> + 'a {
    move |select| {
        rows.iter()
            .filter(|r| r.policy == policy && select(r))
            .map(|r| r.hit_prob)
            .collect()
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn analytic_agreement(report: &mut Report) {
    let rows = sweep(&[point(2.4, 150, &[SINGLE_LRU])]);
    let catalogue: f64 = rows.iter().map(|r| r.catalogue_mean_empirical).sum::<f64>() / rows.len() as f64;
    let analytic = rows[0].catalogue_mean_analytic;
    let cat_err = (catalogue / analytic - 1.0).abs();
    report.line(
        "analytic catalogue size",
        cat_err <= CATALOGUE_TOL,
        format!("empirical {catalogue:.2} vs {analytic:.2}, rel err {cat_err:.4} (tol {CATALOGUE_TOL})"),
    );

    let traffic = ExperimentConfig::desk_scale(2.4, 150, &[]).traffic;
    let expected = traffic.expected_requests(traffic.horizon).unwrap() * rows.len() as f64;
    let total: u64 = rows.iter().map(|r| r.requests_total).sum();
    let req_err = (total as f64 / expected - 1.0).abs();
    report.line(
        "analytic request total",
        req_err <= REQUESTS_TOL,
        format!("{total} pooled over {} seeds vs {expected:.0}, rel err {req_err:.4} (tol {REQUESTS_TOL})", rows.len()),
    );
}

fn sampler_correctness(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for beta in [2.5, 3.0, 4.0] {
        let x_min = 0.5;
        let sum: f64 = (0..PARETO_DRAWS)
            .map(|_| sample_pareto(beta, x_min, 1.0 - rng.random::<f64>()).unwrap())
            .sum();
        let target = beta * x_min / (beta - 1.0);
        worst = worst.max((sum / PARETO_DRAWS as f64 / target - 1.0).abs());
    }
    report.line(
        "pareto sample mean",
        worst <= PARETO_MEAN_TOL,
        format!("worst rel err {worst:.5} over beta in {{2.5, 3, 4}}, {PARETO_DRAWS} draws each (tol {PARETO_MEAN_TOL})"),
    );

    // The operating volume exponent has infinite variance, so it is checked
    // by distribution instead of by mean.
    let beta = 2.1 / (2.1 - 0.5);
    let xs: Vec<f64> = (0..KS_DRAWS)
        .map(|_| sample_pareto(beta, 0.5, 1.0 - rng.random::<f64>()).unwrap())
        .collect();
    let d = ks_statistic(xs, |x| 1.0 - (0.5 / x).powf(beta));
    let crit = KS_CRIT_1PCT / (KS_DRAWS as f64).sqrt();
    report.line(
        "pareto KS at operating beta",
        d < crit,
        format!("D = {d:.5} vs critical {crit:.5}"),
    );

    let mut ks_ok = true;
    let mut details = Vec::new();
    for kind in ShapeKind::ALL {
        let shape: PopularityShape = make_shape(kind, 3.0, 20.0, 0.02).unwrap();
        let times = place_requests(3.0, KS_DRAWS as u64 + 1, &shape, &mut rng);
        let d = ks_statistic(times[1..].to_vec(), |t| shape.cdf(t));
        ks_ok &= d < crit;
        details.push(format!("{kind} D={d:.5}"));
    }
    report.line(
        "shape samplers KS at 1%",
        ks_ok,
        format!("{} (critical {crit:.5})", details.join(", ")),
    );

    let mut worst = 0.0f64;
    for kind in ShapeKind::ALL {
        for tau in [0.1, 5.0, 96.0] {
            let shape = make_shape(kind, 0.0, tau, 0.02).unwrap();
            let total = simpson(|t| shape.pdf(t), 0.0, tau, 20_000);
            worst = worst.max((total - 1.0).abs());
        }
    }
    report.line(
        "shape pdf quadrature",
        worst <= QUADRATURE_TOL,
        format!("worst |integral - 1| = {worst:.2e} (tol {QUADRATURE_TOL:.0e})"),
    );
}

fn dominance(report: &mut Report) {
    let policies = [SINGLE_LRU, MULTI_LRU_ONE, MULTI_LRU_ALL, POP_BOUND, CACHEABILITY];
    let mut points = Vec::new();
    for nbs in [1.0, 2.4, 4.0] {
        for k in [50, 150, 500, 1500] {
            points.push(point(nbs, k, &policies));
        }
    }
    let rows = sweep(&points);
    let mut violations = 0;
    let mut checks = 0;
    for chunk in rows.chunks(policies.len()) {
        let limit = chunk.iter().find(|r| r.policy == CACHEABILITY).unwrap().hit_prob;
        for r in chunk.iter().filter(|r| r.policy != CACHEABILITY) {
            checks += 1;
            if r.hit_prob > limit {
                violations += 1;
            }
        }
    }
    let mut monotone_breaks = 0;
    for nbs in [1.0, 2.4, 4.0] {
        for seed in 1..=SEEDS as u64 {
            let curve: Vec<f64> = rows
                .iter()
                .filter(|r| r.policy == POP_BOUND && r.seed == seed && r.nbs_target == nbs)
                .map(|r| r.hit_prob)
                .collect();
            monotone_breaks += curve.windows(2).filter(|w| w[1] < w[0]).count();
        }
    }
    report.line(
        "dominance",
        violations == 0 && monotone_breaks == 0,
        format!(
            "{violations} of {checks} rows above the cacheability limit, {monotone_breaks} POP decreases in K"
        ),
    );
}

fn degenerate_equivalence(report: &mut Report) {
    let registry = StrategyRegistry::standard();
    let mut disjoint = point(1.0, 150, &[SINGLE_LRU, MULTI_LRU_ONE, MULTI_LRU_ALL]);
    disjoint.network.target_nbs = None;
    disjoint.network.radius = Some(0.45);
    let mut mismatches = 0u64;
    let mut requests = 0u64;
    for seed in 1..=SEEDS as u64 {
        let mut pending: Vec<PolicyOutcome> = Vec::with_capacity(3);
        replay(&disjoint, seed, &registry, |_, _, outcome| {
            pending.push(outcome.clone());
            if pending.len() == 3 {
                requests += 1;
                let key = |o: &PolicyOutcome| (o.hit, o.served_by, o.inserted_into.clone());
                if key(&pending[0]) != key(&pending[1]) || key(&pending[0]) != key(&pending[2]) {
                    mismatches += 1;
                }
                pending.clear();
            }
        })
        .unwrap();
    }
    report.line(
        "degenerate disjoint coverage",
        mismatches == 0,
        format!("{mismatches} differing outcomes over {requests} requests (R = 0.45)"),
    );

    let mut universal = point(1.0, 100_000, &[MULTI_LRU_ALL, CACHEABILITY]);
    universal.network.target_nbs = None;
    universal.network.radius = Some(10.0);
    universal.network.wrap = false;
    let rows = sweep(&[universal]);
    let unequal = rows
        .chunks(2)
        .filter(|c| c[0].hits != c[1].hits || c[0].requests_measured != c[1].requests_measured)
        .count();
    report.line(
        "degenerate universal coverage",
        unequal == 0,
        format!("{unequal} of {} seeds where multi-LRU-All differs from the cacheability limit", rows.len() / 2),
    );
}

fn crossover(report: &mut Report) {
    let rows = sweep(&[
        point(2.4, 151, &[MULTI_LRU_ONE, MULTI_LRU_ALL]),
        point(2.4, 1512, &[MULTI_LRU_ONE, MULTI_LRU_ALL]),
    ]);
    for (k, rho) in [(151, 0.018), (1512, 0.18)] {
        let one = mean_se(&hit_probs(&rows, MULTI_LRU_ONE)(&|r| r.capacity == k));
        let all = mean_se(&hit_probs(&rows, MULTI_LRU_ALL)(&|r| r.capacity == k));
        let se = pooled_se(one.1, all.1);
        let (ok, rule) = if k == 151 {
            (one.0 - all.0 >= SE_MULTIPLE * se, "One - All >= 2 SE")
        } else {
            (all.0 >= one.0, "All >= One")
        };
        report.line(
            &format!("fig1a crossover rho={rho}"),
            ok,
            format!(
                "K={k}: One {:.4} All {:.4}, diff {:+.4}, pooled SE {se:.4} ({rule})",
                one.0,
                all.0,
                one.0 - all.0
            ),
        );
    }
}

fn gains(report: &mut Report) {
    let policies = [SINGLE_LRU, MULTI_LRU_ONE, MULTI_LRU_ALL];
    let rhos = [0.005, 0.018, 0.05, 0.18];
    let mut best = Vec::new();
    let mut details = Vec::new();
    for ev in [2.1, 3.8] {
        let points: Vec<ExperimentConfig> = rhos
            .iter()
            .map(|&rho| {
                let mut c = point(2.4, (rho * 240.0 * 35.0_f64).round() as usize, &policies);
                c.traffic.volume_mean = Some(ev);
                c
            })
            .collect();
        let rows = sweep(&points);
        let mut top = f64::NEG_INFINITY;
        for p in &points {
            let at = |name| mean_se(&hit_probs(&rows, name)(&|r| r.capacity == p.capacity)).0;
            let gain = at(MULTI_LRU_ONE).max(at(MULTI_LRU_ALL)) / at(SINGLE_LRU) - 1.0;
            top = top.max(gain);
        }
        details.push(format!("E[V]={ev}: max gain {top:.4}"));
        best.push(top);
    }
    report.line(
        "fig1b gains",
        best[0] >= MIN_RELATIVE_GAIN && best[1] < best[0],
        format!("{} (need >= {MIN_RELATIVE_GAIN} at 2.1 and smaller at 3.8)", details.join(", ")),
    );
}

fn shape_effect(report: &mut Report) {
    let policies = [MULTI_LRU_ONE, MULTI_LRU_ALL];
    let mut points = Vec::new();
    for kind in [ShapeKind::Uniform, ShapeKind::NegExp] {
        for nbs in [0.5, 1.0, 1.2, 4.0] {
            let mut c = point(nbs, 150, &policies);
            c.traffic.shape_mix = ShapeMix::only(kind);
            points.push(c);
        }
    }
    let rows = sweep(&points);
    let label = |k| ShapeMix::only(k).label();
    let stat = |policy, kind, nbs: f64| {
        let l = label(kind);
        mean_se(&hit_probs(&rows, policy)(&|r| r.shape_mix == l && r.nbs_target == nbs))
    };

    let mut worst = 0.0f64;
    for nbs in [0.5, 1.0, 1.2] {
        for policy in policies {
            let gap = (stat(policy, ShapeKind::NegExp, nbs).0 - stat(policy, ShapeKind::Uniform, nbs).0).abs();
            worst = worst.max(gap);
        }
    }
    report.line(
        "fig1c shape effect at low coverage",
        worst <= SHAPE_GAP_POINTS,
        format!("max |negexp - uniform| = {worst:.4} over nbs in {{0.5, 1, 1.2}} (tol {SHAPE_GAP_POINTS})"),
    );

    let mut ok = true;
    let mut details = Vec::new();
    for policy in policies {
        let neg = stat(policy, ShapeKind::NegExp, 4.0);
        let uni = stat(policy, ShapeKind::Uniform, 4.0);
        let se = pooled_se(neg.1, uni.1);
        ok &= neg.0 - uni.0 >= SE_MULTIPLE * se;
        details.push(format!("{policy}: diff {:+.4}, pooled SE {se:.4}", neg.0 - uni.0));
    }
    report.line("fig1c shape effect at nbs=4", ok, details.join("; "));
}

fn flatness(report: &mut Report) {
    let rows = sweep(&[2.0, 3.0, 4.0].map(|n| point(n, 150, &[SINGLE_LRU])));
    let stats: Vec<(f64, f64)> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&n| mean_se(&hit_probs(&rows, SINGLE_LRU)(&|r| r.nbs_target == n)))
        .collect();
    let mut ok = true;
    let mut spread = 0.0f64;
    for i in 0..stats.len() {
        for j in i + 1..stats.len() {
            let d = (stats[i].0 - stats[j].0).abs();
            spread = spread.max(d);
            ok &= d <= SE_MULTIPLE * pooled_se(stats[i].1, stats[j].1);
        }
    }
    report.line(
        "single-LRU flatness",
        ok,
        format!(
            "means {:.4} {:.4} {:.4}, max spread {spread:.4}, SE {:.4}",
            stats[0].0, stats[1].0, stats[2].0, stats[0].1
        ),
    );
}

fn determinism(report: &mut Report) {
    let registry = StrategyRegistry::standard();
    let mut points = vec![
        point(2.4, 150, &[SINGLE_LRU, MULTI_LRU_ONE, MULTI_LRU_ALL, POP_BOUND, CACHEABILITY]),
        point(4.0, 500, &[MULTI_LRU_ALL, POP_BOUND]),
    ];
    points[1].pop.dt_pop = DtPop::Candidates(vec![1.0, 3.0, 7.0]);
    for p in &mut points {
        p.seeds = vec![1, 2, 3];
    }
    let csv = |threads| {
        to_csv_string(&run_sweep(&points, &registry, Some(threads), RunOptions::default()).unwrap())
    };
    let a = csv(1);
    let b = csv(4);
    let c = csv(1);
    report.line(
        "determinism",
        a == b && a == c,
        format!("{} bytes; 1 vs 4 threads identical: {}, rerun identical: {}", a.len(), a == b, a == c),
    );
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut report = Report { failures: 0 };
    analytic_agreement(&mut report);
    sampler_correctness(&mut report);
    dominance(&mut report);
    degenerate_equivalence(&mut report);
    crossover(&mut report);
    gains(&mut report);
    shape_effect(&mut report);
    flatness(&mut report);
    determinism(&mut report);
    println!(
        "acceptance: {} failing criteria, {:.0} s",
        report.failures,
        started.elapsed().as_secs_f64()
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
