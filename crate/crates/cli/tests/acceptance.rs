//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use projldp::ldp::{
    bonferroni_tail_bounds, empirical_rate_curve, estimate_max_exceedance, window_rate_bounds, Estimator,
};
use projldp::numeric::std_normal_cdf;
use projldp::sphere::ln_marginal_tail;
use projldp::{
    integrate_density_over_window, ks_distance, make_alpha, marginal_density, recover_alpha, sample_projection,
    sample_sphere, Direction, LimitLaw, ModelKind, Region, RngSpec, WindowSpec,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_marginal_density() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..2000 {
        let s = -1.0 + i as f64 / 1000.0;
        worst = worst.max((marginal_density(3, 1, &[s]).map_err(|e| e.to_string())? - 0.5).abs());
    }
    if worst >= 1e-12 {
        return Err(format!("n=3 marginal deviates from 1/2 by {worst:e}"));
    }
    let mut norm_err = 0.0f64;
    for n in 3..=12 {
        for l in [1, 2] {
            let w = WindowSpec::new(vec![0.0; l], 1.0).map_err(|e| e.to_string())?;
            let r = integrate_density_over_window(n, &w, Region::FullBall).map_err(|e| e.to_string())?;
            norm_err = norm_err.max((r.value - 1.0).abs());
        }
    }
    check(
        norm_err < 1e-8,
        format!("max |f - 1/2| = {worst:.1e}, max normalization error = {norm_err:.1e}"),
    )
}

fn c2_tail_rate() -> Outcome {
    let target = 0.5 * 0.64f64.ln();
    let err = |n: usize| -> Result<f64, String> {
        Ok((ln_marginal_tail(n, 0.6).map_err(|e| e.to_string())? / n as f64 - target).abs())
    };
    let (e200, e2000) = (err(200)?, err(2000)?);
    check(
        e2000 < 0.02 && e2000 < e200,
        format!("error at n=200: {e200:.5}, at n=2000: {e2000:.5}"),
    )
}

fn c3_ldp_sandwich() -> Outcome {
    let w = WindowSpec::new(vec![0.6], 0.1).unwrap();
    let ns = [25, 50, 100, 200];
    let est =
        empirical_rate_curve(&ns, &w, 1_000_000, &RngSpec::new(7, 0), Estimator::Auto).map_err(|e| e.to_string())?;
    let b = window_rate_bounds(&w);
    let (lo, hi) = (b.lower - 0.05, b.upper + 0.05);
    let last = est.last().unwrap().rate_hat;
    let monotone = est.windows(2).all(|p| {
        let se = (p[0].rate_std_err.powi(2) + p[1].rate_std_err.powi(2)).sqrt();
        p[1].rate_hat >= p[0].rate_hat - 2.0 * se
    });
    let rates: Vec<String> = est
        .iter()
        .map(|e| format!("{}:{:.4}({})", e.n, e.rate_hat, e.estimator))
        .collect();
    check(
        (lo..=hi).contains(&last) && monotone,
        format!("rates {} vs [{lo:.4}, {hi:.4}], monotone = {monotone}", rates.join(" ")),
    )
}

fn c4_bonferroni() -> Outcome {
    let xs = [0.4, 0.6];
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, n) in [10usize, 50, 100].into_iter().enumerate() {
        let freq =
            estimate_max_exceedance(n, &xs, 10_000_000, &RngSpec::new(4, i as u64)).map_err(|e| e.to_string())?;
        for (x, p) in xs.iter().zip(&freq) {
            let b = bonferroni_tail_bounds(n, *x).map_err(|e| e.to_string())?;
            let hit = p.ci_high >= b.lower && p.ci_low <= b.upper;
            ok &= hit;
            lines.push(format!(
                "n={n},x={x}: {:.3e} in [{:.3e},{:.3e}]{}",
                p.p_hat,
                b.lower,
                b.upper,
                if hit { "" } else { " MISS" }
            ));
        }
    }
    check(ok, lines.join("; "))
}

fn c5_clt() -> Outcome {
    let theta = sample_sphere(1000, &RngSpec::new(5, 0)).map_err(|e| e.to_string())?;
    let mut ks = Vec::new();
    for model in [ModelKind::Continuous, ModelKind::Discrete] {
        let s = sample_projection(&theta, model, 100_000, &RngSpec::new(5, 1)).map_err(|e| e.to_string())?;
        let sd = model.atom_variance().sqrt();
        ks.push(ks_distance(&s, |x| std_normal_cdf(x / sd)));
    }
    check(
        ks.iter().all(|&d| d < 0.01),
        format!("KS continuous = {:.4}, discrete = {:.4}", ks[0], ks[1]),
    )
}

fn c6_spiked() -> Outcome {
    let alpha = make_alpha(&[0.6]).unwrap();
    let theta = Direction::spiked(&alpha, 1000).map_err(|e| e.to_string())?;
    let s =
        sample_projection(&theta, ModelKind::Continuous, 100_000, &RngSpec::new(6, 0)).map_err(|e| e.to_string())?;
    let table = LimitLaw::new(alpha, ModelKind::Continuous)
        .cdf_table()
        .map_err(|e| e.to_string())?;
    let d = ks_distance(&s, |x| table.eval(x));
    check(d < 0.02, format!("KS to nu((0.6)) = {d:.4}"))
}

fn random_alpha(rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let k = rng.random_range(1..=5);
        let a: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.9)).collect();
        if a.iter().map(|v| v * v).sum::<f64>() <= 0.95 * 0.95 {
            return a;
        }
    }
}

fn c7_roundtrip() -> Outcome {
    let mut rng = RngSpec::new(77, 0).rng();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..20 {
        let raw = random_alpha(&mut rng);
        let alpha = make_alpha(&raw).unwrap();
        for model in [ModelKind::Continuous, ModelKind::Discrete] {
            let law = LimitLaw::new(alpha.clone(), model);
            let rec = recover_alpha(|t| law.char_fn(t), model, 16, 0.049).map_err(|e| e.to_string())?;
            if rec.alpha.len() != alpha.len() {
                failures.push(format!("{alpha} ({model}) -> {}", rec.alpha));
                continue;
            }
            for (a, b) in alpha.entries().iter().zip(rec.alpha.entries()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(
        failures.is_empty() && worst < 1e-6,
        format!("40 round trips, max error {worst:.1e}, wrong spike counts: {failures:?}"),
    )
}

fn c8_inversion_vs_sampling() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, a) in [&[][..], &[0.6][..], &[0.6, 0.3][..]].into_iter().enumerate() {
        for (j, model) in [ModelKind::Continuous, ModelKind::Discrete].into_iter().enumerate() {
            let law = LimitLaw::new(make_alpha(a).unwrap(), model);
            let s = law
                .sample(1_000_000, &RngSpec::new(8, (2 * i + j) as u64))
                .map_err(|e| e.to_string())?;
            let table = law.cdf_table().map_err(|e| e.to_string())?;
            let d = ks_distance(&s, |x| table.eval(x));
            let dv = (s.variance() - model.atom_variance()).abs();
            ok &= d < 0.002 && dv < 0.005;
            lines.push(format!("{model}{a:?}: KS {d:.4}, dvar {dv:.4}"));
        }
    }
    check(ok, lines.join("; "))
}

fn c9_continuity() -> Outcome {
    let a = LimitLaw::new(make_alpha(&[0.6, 0.3]).unwrap(), ModelKind::Continuous);
    let b = LimitLaw::new(make_alpha(&[0.6 + 1e-4, 0.3]).unwrap(), ModelKind::Continuous);
    let sup = (0..=40_000)
        .map(|i| -20.0 + i as f64 * 1e-3)
        .map(|t| (a.char_fn(t) - b.char_fn(t)).abs())
        .fold(0.0f64, f64::max);
    check(sup < 1e-3, format!("sup |dphi| = {sup:.2e}"))
}

fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_cli(args: &[&str], threads: &str, out: &Path) -> Result<String, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_projldp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("PROJLDP_THREADS", threads)
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    std::fs::read_to_string(out).map_err(|e| e.to_string())
}

fn c10_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 8] = [
        &["project", "--n", "50", "--count", "20000", "--seed", "3"],
        &[
            "project",
            "--n",
            "200",
            "--theta",
            "spiked:0.6",
            "--model",
            "discrete",
            "--count",
            "20000",
            "--seed",
            "3",
        ],
        &["rate", "--alpha", "0.6,0.3"],
        &["charfn", "--alpha", "0.6", "--t-grid", "0:20:0.5"],
        &[
            "density",
            "--alpha",
            "0.6,0.3",
            "--x-grid",
            "-2:2:0.25",
            "--kind",
            "cdf",
        ],
        &["recover", "--roundtrip", "0.6,0.3,0.1"],
        &[
            "verify-ldp",
            "--window",
            "0.6:0.1",
            "--n",
            "25,50",
            "--count",
            "100000",
            "--seed",
            "7",
        ],
        &["marginal", "--n", "5", "--l", "2", "--grid", "-1:1:0.25"],
    ];
    for (k, args) in commands.iter().enumerate() {
        let a = run_cli(args, "1", &dir.path().join(format!("a{k}.csv")))?;
        let b = run_cli(args, "3", &dir.path().join(format!("b{k}.csv")))?;
        if body(&a) != body(&b) {
            return Err(format!("{args:?}: bodies differ between runs"));
        }
        let replay = dir.path().join(format!("r{k}.csv"));
        let src = dir.path().join(format!("a{k}.csv"));
        run_cli(&["replay", src.to_str().unwrap()], "2", &replay)?;
        let c = std::fs::read_to_string(&replay).map_err(|e| e.to_string())?;
        if body(&a) != body(&c) {
            return Err(format!("{args:?}: replay differs"));
        }
    }
    Ok(format!(
        "{} commands byte-identical across reruns, thread counts and replay",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("marginal-density exactness", c1_marginal_density),
        ("deterministic tail rate", c2_tail_rate),
        ("LDP sandwich by Monte Carlo", c3_ldp_sandwich),
        ("Bonferroni containment", c4_bonferroni),
        ("CLT typicality", c5_clt),
        ("atypical-direction limit law", c6_spiked),
        ("deconvolution round trip", c7_roundtrip),
        ("inversion/sampling cross-validation", c8_inversion_vs_sampling),
        ("continuity of alpha -> nu(alpha)", c9_continuity),
        ("CLI reproducibility", c10_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "acceptance {:>2} {tag} {name} ({:.1}s): {detail}",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
