//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Replicate studies use shortened chains (3000 iterations, 1000 burn-in) unless
//! `EVOPP_FULL_CHAINS=1`, which runs 30000/10000. `EVOPP_CRITERIA=1,3,9`
//! restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::time::Instant;

use evopp::compare::{
    model_probability, pmr, rps_single, CompareOptions, Dic, Direction, Window, WindowSet,
};
use evopp::links::LinkFunction;
use evopp::model::{compensator, log_likelihood, ModelSpec, Param, REFINE_THRESHOLD};
use evopp::pattern::PointPattern;
use evopp::priors::{Prior, PriorSpec};
use evopp::sampler::{run_mcmc, PosteriorSamples, SamplerConfig};
use evopp::simulate::{simulate_thinning, ThinningConfig};
use evopp::study::{
    preset_cells, run_replicate, run_replicate_study, StudyConfig, StudyPreset, StudyResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Suite {
    selected: Option<Vec<u32>>,
    failed: Vec<u32>,
    ran: usize,
}

impl Suite {
    fn wants(&self, id: u32) -> bool {
        self.selected.as_ref().is_none_or(|s| s.contains(&id))
    }

    fn record(&mut self, id: u32, title: &str, pass: bool, detail: String, started: Instant) {
        self.ran += 1;
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {title}: {detail} ({:.1} s)", started.elapsed().as_secs_f64());
        if !pass {
            self.failed.push(id);
        }
    }
}

fn chain() -> SamplerConfig {
    if std::env::var("EVOPP_FULL_CHAINS").is_ok_and(|v| v == "1") {
        SamplerConfig::default()
    } else {
        SamplerConfig::short(3000, 1000, 0)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

// ---------------------------------------------------------------------------
// 1, 2: likelihood and compensator oracles

const REFINE_FIRST: f64 = 0.05;
const REFINE_RATIO: f64 = 1.25;
const REFINE_LAST: f64 = 25.0;

fn naive_kernel(alpha: f64, beta: f64, events: &[f64], s: f64, inclusive: bool) -> f64 {
    events
        .iter()
        .filter(|&&t| t < s || (inclusive && t == s))
        .map(|&t| alpha * beta * (-beta * (s - t)).exp())
        .sum()
}

/// Augmented-grid trapezoid log-likelihood with every kernel sum taken directly.
fn naive_loglik(mu: f64, alpha: f64, beta: f64, link: LinkFunction, k: usize, p: &PointPattern) -> f64 {
    let t_end = p.horizon();
    let ev = p.events();
    let mut nodes: Vec<f64> = (0..=k).map(|i| t_end * i as f64 / k as f64).collect();
    nodes[k] = t_end;
    nodes.extend_from_slice(ev);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let h = |x: f64| link.apply_clamped(x);
    let linear = matches!(link, LinkFunction::Identity) || link == LinkFunction::tobit();

    let mut comp = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ka = naive_kernel(alpha, beta, ev, a, true);
        let kb = naive_kernel(alpha, beta, ev, b, false);
        let len = b - a;
        if beta * len > REFINE_THRESHOLD && ka != 0.0 {
            if linear && ka >= 0.0 && mu >= 0.0 {
                comp += mu * len + (ka - kb) / beta;
                continue;
            }
            let mut acc = 0.0;
            let (mut u0, mut f0) = (0.0, h(mu + ka));
            let mut c = REFINE_FIRST;
            while c <= REFINE_LAST && c / beta < len {
                let u = c / beta;
                let fu = h(mu + naive_kernel(alpha, beta, ev, a + u, true));
                acc += 0.5 * (f0 + fu) * (u - u0);
                (u0, f0) = (u, fu);
                c *= REFINE_RATIO;
            }
            comp += acc + 0.5 * (f0 + h(mu + kb)) * (len - u0);
        } else {
            comp += 0.5 * (h(mu + ka) + h(mu + kb)) * len;
        }
    }
    let ll: f64 = ev.iter().map(|&t| h(mu + naive_kernel(alpha, beta, ev, t, false)).ln()).sum();
    ll - comp
}

fn random_pattern(rng: &mut ChaCha8Rng, n_max: usize, t_end: f64) -> PointPattern {
    let n = rng.random_range(1..=n_max);
    let mut ev: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..t_end)).filter(|&t| t > 0.0).collect();
    ev.sort_by(f64::total_cmp);
    ev.dedup();
    PointPattern::new(ev, t_end).unwrap()
}

fn criterion_1(s: &mut Suite) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let links = [
        LinkFunction::Identity,
        LinkFunction::Power { eta: 0.5 },
        LinkFunction::tobit(),
        LinkFunction::SoftPlus,
        LinkFunction::Log10SoftPlus,
        LinkFunction::Exponential,
    ];
    let mut worst: f64 = 0.0;
    let mut finite = 0;
    let mut scale: f64 = 0.0;
    for i in 0..100 {
        let link = links[i % links.len()];
        let t_end = rng.random_range(20.0..100.0);
        let p = random_pattern(&mut rng, 200, t_end);
        let mu = rng.random_range(0.2..3.0);
        let alpha = match link {
            LinkFunction::Identity => rng.random_range(0.0..0.9),
            // stronger excitation explodes under exp and pushes |loglik| past 1e5,
            // where one ulp already exceeds the tolerance
            LinkFunction::Exponential => rng.random_range(-1.0..0.5),
            _ => rng.random_range(-1.0..1.0),
        };
        // fast decays on coarse grids exercise the refined segments
        let beta = if i % 4 == 0 { rng.random_range(5.0..60.0) } else { rng.random_range(0.2..5.0) };
        let k = rng.random_range(100..2000);
        let m = ModelSpec::hawkes(mu, alpha, beta, link).with_quad_points(k);
        let got = log_likelihood(&m, &p).unwrap();
        let want = naive_loglik(mu, alpha, beta, link, k, &p);
        if got.is_finite() || want.is_finite() {
            finite += 1;
            scale = scale.max(want.abs());
            worst = worst.max((got - want).abs());
        } else if got != want {
            worst = f64::INFINITY;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    s.record(
        1,
        "recursion log-likelihood vs naive O(n^2)",
        worst <= 1e-10 && secs < 10.0,
        format!("100 configs ({finite} finite, max |loglik| {scale:.0}), max |diff| = {worst:.2e}, limit 1e-10"),
        started,
    );
}

fn criterion_2(s: &mut Suite) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let t_end = rng.random_range(20.0..200.0);
        let p = random_pattern(&mut rng, 200, t_end);
        let (mu, alpha, beta) = (rng.random_range(0.1..3.0), rng.random_range(0.0..0.95), rng.random_range(0.1..10.0));
        let m = ModelSpec::hawkes(mu, alpha, beta, LinkFunction::Identity);
        let quad = compensator(&m, &p, t_end).unwrap();
        let exact = mu * t_end + p.events().iter().map(|t| alpha * (1.0 - (-beta * (t_end - t)).exp())).sum::<f64>();
        worst = worst.max((quad - exact).abs() / exact);
    }
    let secs = started.elapsed().as_secs_f64();
    s.record(
        2,
        "identity-link compensator vs closed form at K = 10^4",
        worst < 1e-3 && secs < 10.0,
        format!("50 configs, max relative error {worst:.2e}, limit 1e-3"),
        started,
    );
}

// ---------------------------------------------------------------------------
// 3: simulator law

/// Asymptotic Kolmogorov tail probability with the usual small-sample correction.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    let mut q = 0.0;
    for j in 1..=100 {
        let term = 2.0 * (-1f64).powi(j - 1) * (-2.0 * (j * j) as f64 * lam * lam).exp();
        q += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    q.clamp(0.0, 1.0)
}

fn ks_exponential(mut x: Vec<f64>) -> (f64, f64) {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = 1.0 - (-v).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    (d, ks_p_value(d, x.len()))
}

fn criterion_3(s: &mut Suite) {
    let started = Instant::now();
    let (t_end, cap) = (100.0, 10.0);
    let model = ModelSpec::hpp(1.0);
    let mut counts = Vec::new();
    let mut gaps = Vec::new();
    for seed in 0..1000 {
        let p = simulate_thinning(&model, t_end, &ThinningConfig::seeded(seed)).unwrap();
        counts.push(p.len() as f64);
        // gaps from starts in [0, T - cap], capped at cap: iid Exp(1) by the strong Markov property
        let mut start = 0.0;
        for &t in p.events().iter().chain(std::iter::once(&f64::INFINITY)) {
            if start > t_end - cap {
                break;
            }
            gaps.push((t - start).min(cap));
            start = t;
        }
    }
    let m = mean(&counts);
    let n_gaps = gaps.len();
    let (d, pv) = ks_exponential(gaps);
    let secs = started.elapsed().as_secs_f64();
    s.record(
        3,
        "HPP(1) on (0, 100]: mean count and inter-arrival KS",
        (97.0..=103.0).contains(&m) && pv > 0.01 && secs < 30.0,
        format!("mean count {m:.2} in [97, 103]; KS D = {d:.4} on {n_gaps} gaps, p = {pv:.3} > 0.01"),
        started,
    );
}

// ---------------------------------------------------------------------------
// 4-7: desk-scale reproductions

fn study(preset: StudyPreset, cells: &[&str], reps: usize, seed: u64) -> StudyResult {
    let mut c = StudyConfig::new(preset, reps);
    c.cells = cells.iter().map(|s| s.to_string()).collect();
    run_replicate_study(&c, &chain(), &CompareOptions::default(), seed, 0).unwrap()
}

fn row<'a>(r: &'a StudyResult, cell: &str, model: &str) -> &'a evopp::study::StudyRow {
    r.rows.iter().find(|x| x.preset_cell == cell && x.model == model).unwrap()
}

fn win_rate(r: &StudyResult, cell: &str, fit: &str, dir: Direction) -> f64 {
    let reps: Vec<_> = r.replicates.iter().filter(|x| x.cell == cell).collect();
    let wins = reps
        .iter()
        .filter(|x| {
            let (q, p) = match dir {
                Direction::Excite => (x.fit(fit).and_then(|f| f.pmr_excite), x.hpp_pmr_excite),
                Direction::Inhibit => (x.fit(fit).and_then(|f| f.pmr_inhibit), x.hpp_pmr_inhibit),
            };
            matches!((q, p), (Some(q), Some(p)) if q < p)
        })
        .count();
    wins as f64 / reps.len() as f64
}

fn criterion_4(s: &mut Suite) {
    let started = Instant::now();
    let cells = [("mu=1,alpha=0.01", 0.310, 0.357), ("mu=1,alpha=0.09", 0.302, 0.361)];
    let r = study(StudyPreset::ExciteGrid, &cells.map(|c| c.0), 100, 2024);
    let mut pass = true;
    let mut parts = Vec::new();
    for (cell, want_h, want_p) in cells {
        let h = row(&r, cell, "hawkes").avg_pmr.unwrap_or(f64::NAN);
        let p = row(&r, cell, "hpp").avg_pmr.unwrap_or(f64::NAN);
        let wins = win_rate(&r, cell, "hawkes", Direction::Excite);
        pass &= (h - want_h).abs() <= 0.03 && (p - want_p).abs() <= 0.03 && wins >= 0.9;
        parts.push(format!(
            "{cell}: PMR hawkes {h:.3} (target {want_h}), hpp {p:.3} (target {want_p}), hawkes < hpp in {:.0}%",
            100.0 * wins
        ));
    }
    s.record(4, "excitation grid, 100 replicates per cell", pass, parts.join("; "), started);
}

fn criterion_5(s: &mut Suite) {
    let started = Instant::now();
    let cell = "mu=2,alpha=-0.9";
    let r = study(StudyPreset::InhibitGrid, &[cell], 100, 2025);
    let (h, p) = (row(&r, cell, "hawkes"), row(&r, cell, "hpp"));
    let (ph, pp) = (h.avg_pmr.unwrap_or(f64::NAN), p.avg_pmr.unwrap_or(f64::NAN));
    let (dh, dp) = (h.avg_dic.unwrap_or(f64::NAN), p.avg_dic.unwrap_or(f64::NAN));
    let pass = (ph - 0.304).abs() <= 0.04 && (pp - 0.433).abs() <= 0.04 && dh < dp;
    s.record(
        5,
        "inhibition cell, 100 replicates",
        pass,
        format!(
            "PMR hawkes {ph:.3} (target 0.304), hpp {pp:.3} (target 0.433); mean DIC hawkes {dh:.2} < hpp {dp:.2} \
             ({} hawkes fits without DIC)",
            h.failures
        ),
        started,
    );
}

fn criterion_6(s: &mut Suite) {
    let started = Instant::now();
    let cell = "power_eta=1";
    let r = study(StudyPreset::LinkGrid, &[cell], 20, 2026);
    let close = ["power_eta=1", "softplus", "log10_softplus"];
    let mut dic_gap: f64 = 0.0;
    let mut pmr_gap: f64 = 0.0;
    for a in close {
        for b in close {
            let (ra, rb) = (row(&r, cell, a), row(&r, cell, b));
            dic_gap = dic_gap.max((ra.avg_dic.unwrap_or(f64::NAN) - rb.avg_dic.unwrap_or(f64::NAN)).abs());
            pmr_gap = pmr_gap.max((ra.avg_pmr.unwrap_or(f64::NAN) - rb.avg_pmr.unwrap_or(f64::NAN)).abs());
        }
    }
    let rps_half = row(&r, cell, "power_eta=0.5").avg_rps.unwrap_or(f64::NAN);
    let rps_one = row(&r, cell, "power_eta=1").avg_rps.unwrap_or(f64::NAN);
    let pass = dic_gap < 5.0 && pmr_gap < 0.01 && rps_half - rps_one >= 0.03;
    s.record(
        6,
        "link identification, eta = 1 generator, 20 replicates",
        pass,
        format!(
            "max DIC gap {dic_gap:.2} < 5, max PMR gap {pmr_gap:.4} < 0.01; RPS eta=1/2 {rps_half:.3} vs eta=1 \
             {rps_one:.3} (worse by {:.3} >= 0.03)",
            rps_half - rps_one
        ),
        started,
    );
}

fn criterion_7(s: &mut Suite) {
    let started = Instant::now();
    let mut cell = preset_cells(StudyPreset::EvoLgcp, None).remove(0);
    cell.fits.retain(|f| f.name != "evo_only");
    let opts = CompareOptions {
        compute_rps: false,
        ..CompareOptions::default()
    };
    let out = run_replicate(&cell, 0, 7, &chain(), &opts);
    let (Some(evo), Some(gp)) = (out.fit("gp_evo"), out.fit("gp_only")) else {
        s.record(7, "LGCP preset recovery", false, format!("fit failed: {:?}", out.fits), started);
        return;
    };
    let a = evo.params["alpha"].mean;
    let b = evo.params["beta"].mean;
    let (pe, pg) = (evo.pmr_excite.unwrap_or(f64::NAN), gp.pmr_excite.unwrap_or(f64::NAN));
    let pass = (a - 0.9).abs() <= 0.1 && (b - 20.0).abs() <= 5.0 && pe < pg;
    s.record(
        7,
        "LGCP preset dataset recovery and ordering",
        pass,
        format!(
            "n = {}, alpha {a:.3} (0.9 +- 0.1), beta {b:.2} (20 +- 25%); PMR gp+evo {pe:.3} < gp-only {pg:.3}",
            out.n.unwrap_or(0)
        ),
        started,
    );
}

// ---------------------------------------------------------------------------
// 8: conjugate sampler

fn criterion_8(s: &mut Suite) {
    let started = Instant::now();
    let p = simulate_thinning(&ModelSpec::hpp(1.0), 100.0, &ThinningConfig::seeded(8)).unwrap();
    let (a, b) = (1.0 + p.len() as f64, 1.0 + p.horizon());
    let (exact_mean, exact_var) = (a / b, a / (b * b));
    let priors = PriorSpec::new().with(Param::Mu, Prior::Gamma { shape: 1.0, rate: 1.0 });
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for seed in 0..10 {
        let cfg = SamplerConfig {
            rng_seed: 100 + seed,
            ..SamplerConfig::default()
        };
        let draws = run_mcmc(&ModelSpec::hpp(1.0), &priors, &p, &cfg).unwrap().column(Param::Mu).unwrap();
        means.push(mean(&draws));
        vars.push(sample_var(&draws));
    }
    let mcse = |v: &[f64]| (sample_var(v) / v.len() as f64).sqrt();
    let (zm, zv) = ((mean(&means) - exact_mean) / mcse(&means), (mean(&vars) - exact_var) / mcse(&vars));
    s.record(
        8,
        "HPP + Gamma(1, 1) chain vs Gamma(1 + n, 1 + T)",
        zm.abs() <= 3.0 && zv.abs() <= 3.0,
        format!(
            "n = {}, mean {:.5} vs {exact_mean:.5} ({zm:+.2} MCSE), var {:.3e} vs {exact_var:.3e} ({zv:+.2} MCSE), 10 seeds",
            p.len(),
            mean(&means),
            mean(&vars)
        ),
        started,
    );
}

// ---------------------------------------------------------------------------
// 9: metric examples

fn fixed_draws(template: ModelSpec, m: usize) -> PosteriorSamples {
    let params = template.free_parameters();
    let row: Vec<f64> = params.iter().map(|&q| template.get(q).unwrap()).collect();
    PosteriorSamples {
        draws: row.iter().copied().cycle().take(row.len() * m).collect(),
        params,
        template,
        gp_draws: None,
        loglik: vec![0.0; m],
        acceptance: Vec::new(),
        rng_seed: 0,
        burn_in: 0,
        n_iterations: m,
    }
}

fn one_window(anchor: f64, delta: f64, y: bool) -> Window {
    Window {
        anchor,
        delta,
        p: 0.0,
        y,
        degenerate: false,
        truncated: false,
    }
}

fn naive_rps(draws: &[u64], obs: u64) -> f64 {
    let m = draws.len() as f64;
    let a: f64 = draws.iter().map(|&x| (x as f64 - obs as f64).abs()).sum::<f64>() / m;
    let b: f64 = draws
        .iter()
        .flat_map(|&x| draws.iter().map(move |&y| (x as f64 - y as f64).abs()))
        .sum();
    a - b / (2.0 * m * m)
}

fn criterion_9(s: &mut Suite) {
    let started = Instant::now();
    let mut checks: BTreeMap<&str, bool> = BTreeMap::new();

    checks.insert("dic identical draws p_D = 0", {
        let d = Dic::from_deviances(&[4.25; 5], 4.25).unwrap();
        d.p_d == 0.0 && d.dic == 4.25
    });

    let p = PointPattern::new(vec![3.0, 4.0], 4.0).unwrap();
    checks.insert("window delta = p / rate", Window::new(&p, 3.0, 0.25, 0.5).unwrap().delta == 0.5);
    checks.insert("event at T is degenerate", {
        let w = Window::new(&p, 4.0, 0.6, 0.5).unwrap();
        w.degenerate && !w.y && w.p == 0.0
    });
    checks.insert("single event misses its own window", {
        let p = PointPattern::new(vec![10.0], 100.0).unwrap();
        let w = Window::new(&p, 10.0, 0.5, p.mle_rate()).unwrap();
        w.delta == 50.0 && !w.y
    });

    let q_of = |model: ModelSpec, pattern: &PointPattern, w: Window| {
        let ws = WindowSet { windows: vec![w], rate_hat: 1.0, rng_seed: 0 };
        model_probability(&fixed_draws(model, 4), pattern, &ws, false).unwrap()[0]
    };
    let p10 = PointPattern::new(vec![5.0], 10.0).unwrap();
    checks.insert("q = lambda delta", q_of(ModelSpec::hpp(2.0), &p10, one_window(1.0, 0.1, false)) == 0.2);
    checks.insert("q clamps at 1", q_of(ModelSpec::hpp(50.0), &p10, one_window(1.0, 0.1, false)) == 1.0);
    checks.insert(
        "q = 0 under clamped inhibition",
        q_of(ModelSpec::hawkes(1.0, -5.0, 1.0, LinkFunction::tobit()), &p10, one_window(5.0, 0.1, false)) == 0.0,
    );

    let two = WindowSet {
        windows: vec![one_window(1.0, 1.0, true), one_window(2.0, 1.0, false)],
        rate_hat: 1.0,
        rng_seed: 0,
    };
    checks.insert("pmr all q = 1, all Y = 1", {
        let ws = WindowSet { windows: vec![one_window(1.0, 1.0, true); 3], ..two.clone() };
        pmr(&ws, &[1.0; 3], Direction::Excite).unwrap() == 0.0
    });
    checks.insert("pmr Y = (1, 0), q = (0.4, 0.6)", {
        let e = pmr(&two, &[0.4, 0.6], Direction::Excite).unwrap();
        let i = pmr(&two, &[0.4, 0.6], Direction::Inhibit).unwrap();
        e == 1.0 - 0.4 && i == 0.6
    });

    checks.insert("rps perfect forecast", rps_single(&mut [6, 6, 6, 6], 6) == 0.0);
    checks.insert("rps draws {0, 1}, obs 0", rps_single(&mut [0, 1], 0) == 0.25 && naive_rps(&[0, 1], 0) == 0.25);

    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| *k).collect();
    s.record(
        9,
        "metric examples",
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} exact checks", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
        started,
    );
}

type Criterion = fn(&mut Suite);

fn main() {
    let selected = std::env::var("EVOPP_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut suite = Suite { selected, failed: Vec::new(), ran: 0 };
    let criteria: [(u32, Criterion); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (9, criterion_9),
        (8, criterion_8),
        (7, criterion_7),
        (6, criterion_6),
        (5, criterion_5),
        (4, criterion_4),
    ];
    let full = std::env::var("EVOPP_FULL_CHAINS").is_ok_and(|v| v == "1");
    println!(
        "acceptance: {} chains for replicate studies",
        if full { "full (30000/10000)" } else { "shortened (3000/1000)" }
    );
    for (id, f) in criteria {
        if suite.wants(id) {
            f(&mut suite);
        }
    }
    println!(
        "acceptance: {} run, {} passed, {} failed",
        suite.ran,
        suite.ran - suite.failed.len(),
        suite.failed.len()
    );
    if !suite.failed.is_empty() {
        std::process::exit(1);
    }
}
