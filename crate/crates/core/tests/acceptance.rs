//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print. Exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use meanshift::estimator::{ecf, population_statistic, upper_preset};
use meanshift::harness::{linear_fit, run_benchmark, run_min_n_sweep, success_rates, SweepConfig};
use meanshift::lowerbound::window::window_breakpoints;
use meanshift::lowerbound::{
    build_hard_instance, delta_phi_e, lemma_tv_bound, tv_direct, window_hat, window_time, InstanceOptions,
    TvOptions,
};
use meanshift::quadrature::GaussLegendre;
use meanshift::rng::seeded;
use meanshift::spectral::{find_witness, witness_norm_bound};
use meanshift::{AdversaryKind, BaseDistribution, ContaminationModel};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sweep(text: &str) -> SweepConfig {
    serde_json::from_str(text).expect("valid sweep config")
}

fn criterion_1() -> Outcome {
    let s = sweep(
        r#"{"version":1,"dist":{"kind":"gaussian","d":1},
        "adversary":{"type":"point_shift","z":[5.0]},"alpha":0.1,"mu":[0.3],
        "radius":2.0,"epsilons":[0.5],"n":"auto","trials":30,"seed":1}"#,
    );
    let rows = run_benchmark(&s).map_err(|e| e.to_string())?;
    let rates = success_rates(&rows);
    let (_, n, rate) = rates.first().copied().ok_or("no trials ran")?;
    check(
        rows.len() == 30 && rate >= 2.0 / 3.0,
        format!("n = {n} (budget, C = 64), success rate {rate:.3} over 30 trials, need >= 0.667"),
    )
}

fn criterion_2() -> Outcome {
    // A = 4 alpha exceeds 1 at alpha = 0.3, so the thresholds follow
    // delta = exp(-(pi^2/2)(alpha/eps)^2) with A = 0.9
    let s = sweep(
        r#"{"version":1,"dist":{"kind":"gaussian","d":1},
        "adversary":{"type":"point_shift","z":[5.0]},"alpha":0.3,"mu":[0.3],
        "radius":2.0,"epsilons":[0.6,0.45,0.35,0.3],"n":{"min_search":{"start":64}},
        "trials":30,"seed":1000,
        "thresholds":{"rule":"exp_square","c":4.934802200544679,"a":0.9}}"#,
    );
    let res = run_min_n_sweep(&s).map_err(|e| e.to_string())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut found = Vec::new();
    for r in &res {
        let n = r.n_min.ok_or_else(|| format!("eps = {}: no n reached 2/3 success", r.epsilon))?;
        xs.push((s.alpha / r.epsilon).powi(2));
        ys.push((n as f64).ln());
        found.push(format!("{}:{n}", r.epsilon));
    }
    let fit = linear_fit(&xs, &ys).map_err(|e| e.to_string())?;
    check(
        fit.slope > 0.0 && fit.r2 >= 0.8,
        format!(
            "n_min by eps [{}]; slope of ln n vs (alpha/eps)^2 = {:.3}, R^2 = {:.3} (need > 0, >= 0.8)",
            found.join(", "),
            fit.slope,
            fit.r2
        ),
    )
}

fn criterion_3() -> Outcome {
    let s = sweep(
        r#"{"version":1,"dist":{"kind":"uniform"},
        "adversary":{"type":"point_shift","z":[5.0]},"alpha":0.1,"mu":[0.3],
        "radius":2.0,"epsilons":[0.4,0.2,0.1],"n":{"min_search":{"start":16}},
        "trials":30,"seed":2000}"#,
    );
    let res = run_min_n_sweep(&s).map_err(|e| e.to_string())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut found = Vec::new();
    for r in &res {
        let n = r.n_min.ok_or_else(|| format!("eps = {}: no n reached 2/3 success", r.epsilon))?;
        xs.push((1.0 / r.epsilon).ln());
        ys.push((n as f64).ln());
        found.push(format!("{}:{n}", r.epsilon));
    }
    let fit = linear_fit(&xs, &ys).map_err(|e| e.to_string())?;
    check(
        fit.slope <= 2.5,
        format!(
            "n_min by eps [{}]; slope of ln n vs ln(1/eps) = {:.3} (need <= 2.5)",
            found.join(", "),
            fit.slope
        ),
    )
}

/// Every witness returned by criteria 4 and 5, with its allowed norm.
struct WitnessLog {
    checked: usize,
    violations: usize,
}

impl WitnessLog {
    fn record(&mut self, dist: &BaseDistribution, delta: f64, omega: &[f64]) {
        let bound = witness_norm_bound(dist.constants().deriv_l1_m1, delta, dist.dim());
        let norm = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.checked += 1;
        if norm > bound {
            self.violations += 1;
        }
    }
}

fn random_dist<R: Rng>(rng: &mut R) -> BaseDistribution {
    match rng.random_range(0..6) {
        0 => BaseDistribution::gaussian(1),
        1 => BaseDistribution::gaussian(2),
        2 => BaseDistribution::laplace(1),
        3 => BaseDistribution::laplace(2),
        4 => BaseDistribution::uniform(),
        _ => BaseDistribution::uniform_conv(3).expect("valid order"),
    }
}

fn criterion_4(log: &mut WitnessLog) -> Outcome {
    let mut rng = seeded(404);
    let mut large_checked = 0;
    let mut worst_large = f64::INFINITY;
    let mut worst_small = f64::INFINITY;
    for _ in 0..20 {
        let dist = random_dist(&mut rng);
        let d = dist.dim();
        let eps = rng.random_range(0.2..0.6);
        let alpha = rng.random_range(0.02..0.2);
        let preset = upper_preset(&dist, eps, alpha).map_err(|e| e.to_string())?;
        let mu: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-6.0..6.0)).collect();
        let model = ContaminationModel::new(alpha, mu.clone(), AdversaryKind::PointShift { z }, dist)
            .map_err(|e| e.to_string())?;
        // mu_hat at distance in [eps, 3] in a random direction
        let r = rng.random_range(eps..3.0);
        let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        dir.iter_mut().for_each(|x| *x *= r / len);
        let v = dir;
        let mu_hat: Vec<f64> = mu.iter().zip(&v).map(|(a, b)| a + b).collect();
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();

        let w = find_witness(&dist, &v, preset.a, preset.delta, None).map_err(|e| e.to_string())?;
        let omega = w
            .omega
            .ok_or_else(|| format!("{dist}: no witness for |v| = {vnorm} at eps = {eps}"))?;
        log.record(&dist, preset.delta, &omega);
        let t = population_statistic(&model, &mu_hat, &omega).norm();
        let lower = 2.0 * (1.0 - alpha) * preset.a - alpha;
        worst_large = worst_large.min(t - lower);
        large_checked += 1;

        for _ in 0..100 {
            let omega: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let onorm = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
            let t = population_statistic(&model, &mu_hat, &omega).norm();
            let upper = 2.0 * (1.0 - alpha) * PI * onorm * vnorm + alpha;
            worst_small = worst_small.min(upper - t);
        }
    }
    check(
        worst_large >= -1e-10 && worst_small >= -1e-10,
        format!(
            "{large_checked} witnesses: min |T| - (2(1-a)A - a) = {worst_large:.3e}; \
             2000 frequencies: min bound - |T| = {worst_small:.3e} (tolerance 1e-10)"
        ),
    )
}

fn criterion_5(log: &mut WitnessLog) -> Outcome {
    let mut rng = seeded(505);
    for _ in 0..500 {
        let dist = random_dist(&mut rng);
        let d = dist.dim();
        let eps = rng.random_range(0.05..0.8);
        let alpha = rng.random_range(0.01..0.24);
        let preset = upper_preset(&dist, eps, alpha).map_err(|e| e.to_string())?;
        let r = eps * rng.random_range(1.0f64..20.0);
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        v.iter_mut().for_each(|x| *x *= r / len);
        let w = find_witness(&dist, &v, preset.a, preset.delta, None).map_err(|e| e.to_string())?;
        if let Some(omega) = &w.omega {
            log.record(&dist, preset.delta, omega);
            if !w.within_norm_limit() {
                log.violations += 1;
            }
        }
    }
    check(
        log.checked > 0 && log.violations == 0,
        format!(
            "{} witnesses checked against sqrt(d) M1 / (2 pi delta): {} violations",
            log.checked, log.violations
        ),
    )
}

fn criterion_6() -> Outcome {
    let (eps, alpha) = (0.2, 0.3);
    let inst = build_hard_instance(&BaseDistribution::gaussian(1), eps, alpha, &InstanceOptions::default())
        .map_err(|e| e.to_string())?;
    let k = inst.g.truncation_k as f64;
    let pre = (1.0 - alpha) * eps / alpha;
    let boundary = 2.0 * pre * window_time(inst.w, (k + 1.0) * eps).abs();
    let total = inst.g.total_mass().abs();
    let l1 = inst.g.l1_norm();
    let mut rng = seeded(606);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let j: i32 = rng.random_range(-10..=10);
        let omega = f64::from(j) / eps + rng.random_range(-inst.w..=inst.w);
        worst = worst.max(delta_phi_e(&inst, omega).norm());
    }
    let tail = inst.g.tail_bound;
    let s0 = inst.q0.total_mass();
    let s1 = inst.q1.total_mass();
    let probs = inst.q0.is_nonnegative() && inst.q1.is_nonnegative();
    check(
        total <= 1e-10 + boundary
            && l1 <= 2.0
            && worst <= 10.0 * tail
            && probs
            && (s0 - 1.0).abs() <= 1e-10
            && (s1 - 1.0).abs() <= 1e-10,
        format!(
            "c = {:.4}, K = {}, |mass g| = {total:.2e} (boundary {boundary:.2e}), ||g||_1 = {l1:.6}, \
             max in-band |dphi_E| = {worst:.2e} vs 10 tail = {:.2e}, Q0/Q1 mass - 1 = {:.1e}/{:.1e}",
            inst.c,
            inst.g.truncation_k,
            10.0 * tail,
            s0 - 1.0,
            s1 - 1.0
        ),
    )
}

fn criterion_7() -> Outcome {
    let alpha = 0.3;
    let epsilons = [0.6, 0.45, 0.35, 0.3, 0.25];
    let opts = TvOptions::default();
    let mut lines = Vec::new();
    let mut dominated = 0;
    let mut gaussian_tv = Vec::new();
    for base in [BaseDistribution::gaussian(1), BaseDistribution::laplace(1)] {
        for &eps in &epsilons {
            let inst =
                build_hard_instance(&base, eps, alpha, &InstanceOptions::default()).map_err(|e| e.to_string())?;
            let direct = tv_direct(&inst, opts.abs_tol).map_err(|e| e.to_string())?;
            let bound = lemma_tv_bound(&inst, &opts).map_err(|e| e.to_string())?;
            if direct.value + direct.error <= bound.value {
                dominated += 1;
            }
            if base == BaseDistribution::gaussian(1) {
                gaussian_tv.push(direct.value);
            }
            lines.push(format!("{base} eps={eps}: {:.3e} <= {:.3e}", direct.value, bound.value));
        }
    }
    let decreasing = gaussian_tv.windows(2).all(|w| w[1] < w[0]);
    let xs: Vec<f64> = epsilons.iter().map(|e| (alpha / e).powi(2)).collect();
    let ys: Vec<f64> = gaussian_tv.iter().map(|t| t.ln()).collect();
    let fit = linear_fit(&xs, &ys).map_err(|e| e.to_string())?;
    check(
        dominated == 10 && decreasing,
        format!(
            "{dominated}/10 dominated; gaussian TV strictly decreasing in alpha/eps: {decreasing} \
             (ln TV vs (alpha/eps)^2 slope {:.2}, R^2 {:.3}); {}",
            fit.slope,
            fit.r2,
            lines.join("; ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let rule = GaussLegendre::new(40);
    let mut rng = seeded(808);
    let mut worst = 0.0f64;
    let mut exact = true;
    for w in [0.1, 1.0, 10.0] {
        for t in [0.0, 0.3, -0.7, 1.0, -1.0] {
            exact &= window_hat(w, t * w) == 1.0;
        }
        for t in [2.0, -2.0, 2.5, 7.0] {
            exact &= window_hat(w, t * w) == 0.0;
        }
        for _ in 0..20 {
            let x = rng.random_range(-20.0..20.0) / w;
            let cosine = |o: f64| (2.0 * PI * o * x).cos();
            let mut q = rule.integrate_composite(cosine, 0.0, w, 16);
            for p in window_breakpoints(w).windows(2) {
                q += rule.integrate_composite(|o| window_hat(w, o) * cosine(o), p[0], p[1], 8);
            }
            worst = worst.max((2.0 * q - window_time(w, x)).abs());
        }
    }
    check(
        worst <= 1e-8 && exact,
        format!("max |window_time - quadrature| = {worst:.2e} over 60 points (need <= 1e-8); plateau/support exact: {exact}"),
    )
}

fn criterion_9() -> Outcome {
    let n = 1_000_000usize;
    let tol = 5.0 / (n as f64).sqrt();
    let mut worst = 0.0f64;
    let dists = [
        BaseDistribution::gaussian(1),
        BaseDistribution::laplace(1),
        BaseDistribution::uniform(),
        BaseDistribution::uniform_conv(3).expect("valid order"),
    ];
    let mut rng = seeded(909);
    for (i, dist) in dists.iter().enumerate() {
        let samples = dist.sample(&mut seeded(9000 + i as u64), n);
        for _ in 0..20 {
            let omega = [rng.random_range(-3.0..3.0)];
            let exact = dist.cf(&omega).map_err(|e| e.to_string())?;
            let emp = ecf(&samples, &omega).map_err(|e| e.to_string())?;
            worst = worst.max((exact - emp).norm());
        }
    }
    check(
        worst <= tol,
        format!("max |cf - ecf| = {worst:.2e} over 4 kinds x 20 frequencies (need <= 5/sqrt(n) = {tol:.1e})"),
    )
}

fn main() {
    let mut log = WitnessLog {
        checked: 0,
        violations: 0,
    };
    let mut failed = 0;
    let mut report = |id: u32, name: &str, limit: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s time budget", limit.as_secs())),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {id}: {name} ({:.1}s) - {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    };
    let min = |m: u64| Duration::from_secs(60 * m);
    report(1, "upper-bound guarantee, gaussian", min(2), &mut criterion_1);
    report(2, "n_min trend, gaussian", min(30), &mut criterion_2);
    report(3, "n_min trend, uniform", min(15), &mut criterion_3);
    report(4, "population claims", min(5), &mut || criterion_4(&mut log));
    report(5, "witness norm bound", min(5), &mut || criterion_5(&mut log));
    report(6, "lower-bound construction certificates", min(1), &mut criterion_6);
    report(7, "TV dominance and trend", min(5), &mut criterion_7);
    report(8, "window oracle", min(5), &mut criterion_8);
    report(9, "ECF/CF consistency", min(5), &mut criterion_9);
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
