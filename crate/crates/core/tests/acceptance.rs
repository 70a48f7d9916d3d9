//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p wavegroup --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wavegroup::mbr::SPEED_OF_LIGHT_KM_S;
use wavegroup::{
    apportion_charge, ellipsoid_profile, em_radius, find_null_frame, fit_dipole, flux_radius,
    make_isotropic_rest, pair_boost_closed_form, synthesize_sky, zitter_speed, BalancedPair,
    Superposition, Vec3,
};

type Outcome = Result<String, String>;

fn gamma(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

/// Direction sampler independent of the library's: uniform z and azimuth.
fn uniform_direction(rng: &mut StdRng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let s = (1.0 - z * z).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn clock_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=1024);
        let momenta: Vec<Vec3> = (0..n)
            .map(|_| uniform_direction(&mut rng) * rng.random_range(1e-3..=1e3))
            .collect();
        let s = Superposition::from_momenta(momenta).map_err(|e| e.to_string())?;
        let report = zitter_speed(&s);
        let closed = (1.0 - report.speed * report.speed).sqrt();
        worst = worst.max((report.zitter_speed - closed).abs());
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && within(elapsed, 5.0),
        format!("max |V_Z - sqrt(1-V^2)| = {worst:.3e} (<= 1e-12), {:.2} s (< 5 s)", elapsed.as_secs_f64()),
    )
}

/// Boost of a 128-pair isotropic rest particle to 0.99, shared by two criteria.
struct BigBoost {
    drift: f64,
    eq9_relative: f64,
    elapsed: Duration,
}

fn big_boost() -> Result<BigBoost, String> {
    let rest = make_isotropic_rest(128, 1.0, 99).map_err(|e| e.to_string())?;
    let m0 = rest.rest_mass().map_err(|e| e.to_string())?;
    let v = Vec3::X * 0.99;
    let start = Instant::now();
    // Default options cap each sub-step impulse at 1e-4 m_e.
    let result = rest.boost(v, 1e-9).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let fin = &result.final_state;
    let m0_final = fin.rest_mass().map_err(|e| e.to_string())?;
    let me = fin.effective_mass();
    Ok(BigBoost {
        drift: (m0_final - m0).abs() / m0,
        eq9_relative: (fin.total_momentum() - v * (gamma(0.99) * m0)).norm() / me,
        elapsed,
    })
}

fn invariant_mass(b: &BigBoost) -> Outcome {
    verdict(
        b.drift <= 1e-8 && within(b.elapsed, 2.0),
        format!("rest-mass drift {:.3e} (<= 1e-8), {:.2} s (< 2 s)", b.drift, b.elapsed.as_secs_f64()),
    )
}

fn relativistic_momentum(b: &BigBoost) -> Outcome {
    verdict(
        b.eq9_relative <= 1e-8,
        format!("|P - gamma m0 V| / m_e = {:.3e} (<= 1e-8)", b.eq9_relative),
    )
}

fn pair_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for v in [0.3, 0.6, 0.9] {
        for theta in [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2] {
            let pair = BalancedPair::in_plane(theta, 1.0).map_err(|e| e.to_string())?;
            let closed = pair_boost_closed_form(&pair, v).map_err(|e| e.to_string())?;
            let rest = pair.rest_components(v).map_err(|e| e.to_string())?;
            let moved = rest.boost(Vec3::X * v, 1e-10).map_err(|e| e.to_string())?.final_state;
            let c = moved.components();
            let (a, b) = (c[0].magnitude(), c[1].magnitude());
            let offset = (c[0].momentum() - c[1].momentum()) * 0.5;
            let r = offset.norm();
            let angle = Vec3::X.angle_to(offset);
            worst = worst
                .max((a - closed.a).abs() / closed.a)
                .max((b - closed.b).abs() / closed.b)
                .max((r - closed.r).abs() / closed.r)
                .max((angle - theta).abs());
        }
    }
    verdict(
        worst <= 1e-6,
        format!("max relative mismatch over 3x5 grid {worst:.3e} (<= 1e-6)"),
    )
}

fn figure_one() -> Outcome {
    let rest = make_isotropic_rest(10_000, 1.0, 7).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut eccentricities = Vec::new();
    for v in [0.0, 0.3, 0.6, 0.9] {
        let start = Instant::now();
        let profile = ellipsoid_profile(&rest, v, 32).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        // Oracle evaluated here rather than through the profile helper.
        let err = profile
            .samples()
            .map(|s| {
                let c = s.theta.cos();
                let closed = 1.0 / (1.0 - v * v * c * c).sqrt();
                (s.r - closed).abs() / s.r
            })
            .fold(0.0, f64::max);
        let e = profile.fit_ellipse().map_err(|e| e.to_string())?.eccentricity;
        ok &= err <= 0.01 && within(elapsed, 10.0);
        eccentricities.push(e);
        lines.push(format!("V={v}: err {err:.2e}, e {e:.4}, {:.2} s", elapsed.as_secs_f64()));
    }
    let increasing = eccentricities.windows(2).all(|w| w[1] > w[0]);
    verdict(
        ok && increasing,
        format!("{} (err <= 1%, < 10 s each, eccentricity increasing: {increasing})", lines.join("; ")),
    )
}

fn em_compression() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let v = (1.0 - 1e-9) * i as f64 / 99.0;
        for j in 0..100 {
            let theta = PI * j as f64 / 99.0;
            let f = flux_radius(v, theta);
            worst = worst.max((em_radius(v, theta) * gamma(v) - f).abs() / f);
        }
    }
    let q = -1.0;
    let rest = make_isotropic_rest(256, 1.0, 5).map_err(|e| e.to_string())?;
    let mut charge_worst = (apportion_charge(&rest, q).iter().sum::<f64>() - q).abs();
    for v in [Vec3::X * 0.3, Vec3::new(0.2, -0.6, 0.1), Vec3::Z * 0.95] {
        let moved = rest.boost(v, 1e-9).map_err(|e| e.to_string())?.final_state;
        charge_worst = charge_worst.max((apportion_charge(&moved, q).iter().sum::<f64>() - q).abs());
    }
    verdict(
        worst <= 1e-12 && charge_worst <= 1e-12,
        format!("max |em*gamma - r|/r {worst:.3e}, max |sum q - Q| {charge_worst:.3e} (both <= 1e-12)"),
    )
}

fn frame_recovery() -> Outcome {
    let beta = 350.0 / SPEED_OF_LIGHT_KM_S;
    let mut rng = StdRng::seed_from_u64(350);
    let truth = uniform_direction(&mut rng) * beta;
    let start = Instant::now();
    let est = find_null_frame(truth, 2.725, 10_000, 0.0, 1e-9, 11).map_err(|e| e.to_string())?;
    let first = fit_dipole(&synthesize_sky(truth, 2.725, 10_000, 0.0, 11).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let recovered = -est.beta;
    let speed_err = (recovered.norm() - beta).abs() / beta;
    let angle = recovered.angle_to(truth).to_degrees();
    let ratio_err = (first.ratio() - beta).abs() / beta;
    verdict(
        speed_err <= 1e-3 && angle <= 0.1 && ratio_err <= 0.01 && within(elapsed, 2.0),
        format!(
            "speed {:.3} km/s (err {speed_err:.2e} <= 1e-3), direction {angle:.2e} deg (<= 0.1), \
             dipole ratio {:.4e} (err {ratio_err:.2e} <= 1e-2), {:.2} s (< 2 s)",
            est.speed_km_s(),
            first.ratio(),
            elapsed.as_secs_f64()
        ),
    )
}

fn run_cli(args: &[String]) -> Result<(i32, Vec<u8>), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_wavegroup"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((output.status.code().unwrap_or(-1), output.stdout))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/antipodal_pair.txt");
    let out = |name: &str| -> PathBuf { dir.path().join(name) };
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let runs: Vec<(&str, Vec<String>, Vec<PathBuf>)> = vec![
        (
            "boost",
            vec!["boost".into(), "--input".into(), s(&data), "--velocity".into(), "0.6".into(), "--output".into(), s(&out("boost.txt"))],
            vec![out("boost.txt")],
        ),
        (
            "ellipsoid",
            vec!["ellipsoid".into(), "--v".into(), "0.6".into(), "--pairs".into(), "2000".into(), "--bins".into(), "32".into(), "--seed".into(), "7".into(), "--output".into(), s(&out("ellipsoid.csv"))],
            vec![out("ellipsoid.csv")],
        ),
        (
            "clock",
            vec!["clock".into(), "--speeds".into(), "0,0.6,0.9".into(), "--seed".into(), "3".into(), "--output".into(), s(&out("clock.csv"))],
            vec![out("clock.csv")],
        ),
        (
            "pair",
            vec!["pair".into(), "--output".into(), s(&out("pair.csv"))],
            vec![out("pair.csv")],
        ),
        (
            "mbr-find",
            vec!["mbr-find".into(), "--noise".into(), "2.725e-6".into(), "--tolerance".into(), "1e-6".into(), "--seed".into(), "5".into(), "--output".into(), s(&out("frame.txt")), "--sky-output".into(), s(&out("sky.csv"))],
            vec![out("frame.txt"), out("sky.csv")],
        ),
        ("check", vec!["check".into(), "--seed".into(), "1".into()], vec![]),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, args, files) in runs {
        let (code1, stdout1) = run_cli(&args)?;
        let first: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap_or_default()).collect();
        let (code2, stdout2) = run_cli(&args)?;
        let second: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap_or_default()).collect();
        let same = code1 == 0
            && code2 == 0
            && stdout1 == stdout2
            && first == second
            && first.iter().all(|b| !b.is_empty());
        ok &= same;
        details.push(format!("{name}:{}", if same { "identical" } else { "DIFFERS" }));
    }
    verdict(ok, details.join(", "))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("clock identity", clock_identity()));
    match big_boost() {
        Ok(b) => {
            results.push(("invariant mass", invariant_mass(&b)));
            results.push(("relativistic momentum", relativistic_momentum(&b)));
        }
        Err(e) => {
            results.push(("invariant mass", Err(e.clone())));
            results.push(("relativistic momentum", Err(e)));
        }
    }
    results.push(("pair closed form vs integration", pair_closed_form()));
    results.push(("figure 1 reproduction", figure_one()));
    results.push(("em compression and charge", em_compression()));
    results.push(("mbr frame recovery", frame_recovery()));
    results.push(("cli determinism", determinism()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
