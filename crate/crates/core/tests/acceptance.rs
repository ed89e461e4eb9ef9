// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use metrobound::ce::{alpha_beta, beta_constraint_solve, ce_sdp_bound, finite_n_bound, BetaConstraint, HMatrix};
use metrobound::channel::{Channel, Tolerances};
use metrobound::cs::{
    classify_by_epsilon, classify_phi_extremality, cs_bound, epsilon_max, mu_condition, Classification, Epsilon,
    Sign,
};
use metrobound::linalg::{max_eigenvalue, op_norm};
use metrobound::models::{self, reference_bound, reference_h, Method, ModelName, ModelSpec, ReferenceBound};
use metrobound::qfi::optimize_input;
use metrobound::random::random_channel;
use metrobound::sweep::{sweep, SweepOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn model(name: ModelName, eta: f64) -> Channel {
    models::build(&ModelSpec::new(name, eta).unwrap(), 0.0).unwrap()
}

fn unitary() -> Channel {
    models::build(&ModelSpec::with_limit(ModelName::Dephasing, 1.0, true).unwrap(), 0.0).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_form_constants() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for name in ModelName::ALL {
        for eta in GRID {
            let spec = ModelSpec::new(name, eta).unwrap();
            let expect = reference_bound(&spec, Method::Ce).unwrap().value().unwrap();
            let got = ce_sdp_bound(&model(name, eta))
                .map_err(|e| format!("{name} η={eta}: {e}"))?
                .bound_const
                .ok_or_else(|| format!("{name} η={eta}: no bound"))?;
            let rel = (got - expect).abs() / expect;
            worst = worst.max(rel);
            ensure(rel <= 1e-6, || format!("{name} η={eta}: {got} vs {expect} (rel {rel:.2e})"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("36 points, worst rel. error {worst:.2e}, {elapsed:.2?}"))
}

fn cs_closed_forms() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    for eta in GRID {
        let cases = [
            (ModelName::Dephasing, (1.0 - eta * eta).sqrt() / eta),
            (ModelName::Depolarizing, ((1.0 - eta) * (1.0 + 3.0 * eta)).sqrt() / (2.0 * eta)),
        ];
        for (name, expect) in cases {
            let cp = model(name, eta).choi().map_err(|e| e.to_string())?;
            for sign in [Sign::Plus, Sign::Minus] {
                let Epsilon::Finite(got) = epsilon_max(&cp, sign, &tol).map_err(|e| e.to_string())? else {
                    return Err(format!("{name} η={eta}: ε not finite"));
                };
                let err = (got - expect).abs();
                worst = worst.max(err);
                ensure(err <= 1e-8, || format!("{name} η={eta} {sign:?}: {got} vs {expect}"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("36 values, worst abs. error {worst:.2e}, {elapsed:.2?}"))
}

fn extremality_pattern() -> Outcome {
    for name in ModelName::ALL {
        let expect = match name {
            ModelName::Depolarizing | ModelName::Dephasing => Classification::PhiNonextremal,
            _ => Classification::PhiExtremal,
        };
        for eta in GRID {
            let got = classify_phi_extremality(&model(name, eta)).map_err(|e| format!("{name} η={eta}: {e}"))?;
            ensure(got == expect, || format!("{name} η={eta}: {got:?}"))?;
            let cs = reference_bound(&ModelSpec::new(name, eta).unwrap(), Method::Cs).unwrap();
            ensure(
                matches!(cs, ReferenceBound::NotApplicable) == (expect == Classification::PhiExtremal),
                || format!("{name}: table applicability disagrees"),
            )?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = Tolerances::default();
    let (mut nonextremal, mut extremal) = (0, 0);
    for i in 0..200 {
        let d_in: usize = rng.random_range(1..=3);
        let d_out: usize = rng.random_range(1..=3);
        let k = rng.random_range(d_in.div_ceil(d_out)..=d_in * d_out);
        let ch = random_channel(&mut rng, d_in, d_out, k).map_err(|e| e.to_string())?;
        let by_eps = classify_by_epsilon(&ch.choi().unwrap(), ch.k(), &tol).map_err(|e| e.to_string())?;
        let by_mu = mu_condition(&ch).map_err(|e| e.to_string())?.mu.is_some();
        ensure(by_eps.is_nonextremal() == by_mu, || {
            format!("random channel {i} ({d_in}→{d_out}, k={k}): ε says {by_eps:?}, μ says {by_mu}")
        })?;
        if by_mu {
            nonextremal += 1;
        } else {
            extremal += 1;
        }
    }
    Ok(format!(
        "closed-form pattern at 36 points; 200 random channels agree ({nonextremal} non-extremal, {extremal} extremal)"
    ))
}

fn reference_h_optimal() -> Outcome {
    let mut worst = 0.0f64;
    for name in ModelName::ALL {
        for eta in [0.3, 0.5, 0.8] {
            let spec = ModelSpec::new(name, eta).unwrap();
            let ch = model(name, eta);
            let h = reference_h(&spec).unwrap().ok_or_else(|| format!("{name}: no reference h"))?;
            let (alpha, beta) = alpha_beta(&ch, &h).map_err(|e| e.to_string())?;
            let b = op_norm(&beta);
            ensure(b <= 1e-9, || format!("{name} η={eta}: ‖β‖ = {b:.2e}"))?;
            let t = ce_sdp_bound(&ch).map_err(|e| e.to_string())?.t_opt.unwrap();
            let a = max_eigenvalue(&alpha);
            worst = worst.max((a - t).abs());
            ensure((a - t).abs() <= 1e-6, || format!("{name} η={eta}: ‖α(h)‖ = {a} vs t_opt = {t}"))?;
        }
    }
    Ok(format!("12 cases, β = 0 within 1e-9, worst |‖α‖ − t_opt| = {worst:.2e}"))
}

fn sandwich() -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut tightest = 0.0f64;
    for name in ModelName::ALL {
        for eta in [0.5, 0.8] {
            let ch = model(name, eta);
            let ce = ce_sdp_bound(&ch).map_err(|e| e.to_string())?;
            let t = ce.t_opt.unwrap();
            let f_cl = cs_bound(&ch).map_err(|e| e.to_string())?.f_cl;
            for n in 1..=3 {
                let start = Instant::now();
                let oracle = optimize_input(&ch, n, 32, 7).map_err(|e| e.to_string())?;
                let took = start.elapsed();
                slowest = slowest.max(took);
                ensure(took < Duration::from_secs(120), || format!("{name} η={eta} N={n}: {took:?}"))?;
                let nf = n as f64;
                let ce_cap = 4.0 * nf * t;
                tightest = tightest.max(oracle.best_qfi / ce_cap);
                ensure(oracle.best_qfi <= ce_cap * (1.0 + 1e-9), || {
                    format!("{name} η={eta} N={n}: oracle {} > CE {ce_cap}", oracle.best_qfi)
                })?;
                if let Some(f) = f_cl {
                    ensure(oracle.best_qfi <= nf * f * (1.0 + 1e-9), || {
                        format!("{name} η={eta} N={n}: oracle {} > CS {}", oracle.best_qfi, nf * f)
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "24 oracle runs of 32 restarts, max oracle/CE ratio {tightest:.4}, slowest run {slowest:.2?}"
    ))
}

fn crossover() -> Outcome {
    let ch = model(ModelName::LossyInterferometer, 0.95);
    let s = sweep(
        &ch,
        &SweepOptions {
            n_max: 1000,
            restarts: 4,
            ..SweepOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let n = s.crossover.ok_or("no crossover found")?;
    ensure((19..=21).contains(&n), || format!("crossover at N = {n}"))?;
    Ok(format!("bound const/√N overtakes 1/N at N* = {n}"))
}

fn lossy_enhancement() -> Outcome {
    let eta = 0.62;
    let ch = model(ModelName::LossyInterferometer, eta);
    let c = ce_sdp_bound(&ch).map_err(|e| e.to_string())?.bound_const.unwrap();
    // Shot-noise limit with losses: 1/√(N·F₁), F₁ from the single-probe oracle.
    let f1 = optimize_input(&ch, 1, 8, 0).map_err(|e| e.to_string())?.best_qfi;
    let factor = c * f1.sqrt();
    let expect = (1.0 - eta).sqrt();
    ensure((factor - expect).abs() < 1e-6, || format!("factor {factor} vs √(1−η) = {expect}"))?;
    ensure(format!("{factor:.2}") == "0.62", || format!("factor {factor} does not round to 0.62"))?;
    ensure(factor < 0.67, || format!("factor {factor} not below 0.67"))?;
    Ok(format!("enhancement factor {factor:.6} (≈ 0.62 < 0.67)"))
}

fn ce_dominates_cs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut margin = f64::INFINITY;
    for i in 0..100 {
        let ch = random_channel(&mut rng, 2, 2, 4).map_err(|e| e.to_string())?;
        let cs = cs_bound(&ch).map_err(|e| e.to_string())?;
        let ce = ce_sdp_bound(&ch).map_err(|e| e.to_string())?;
        let (a, b) = (
            ce.bound_const.ok_or_else(|| format!("channel {i}: CE not certified"))?,
            cs.bound_const.ok_or_else(|| format!("channel {i}: CS not applicable"))?,
        );
        margin = margin.min(a - b);
        ensure(a >= b - 1e-6, || format!("channel {i}: CE {a} < CS {b}"))?;
    }
    let ch = model(ModelName::Depolarizing, 0.5);
    let ce = ce_sdp_bound(&ch).map_err(|e| e.to_string())?.bound_const.unwrap();
    let cs = cs_bound(&ch).map_err(|e| e.to_string())?.bound_const.unwrap();
    ensure((ce - 2f64.sqrt()).abs() < 1e-6 && (cs - 1.25f64.sqrt()).abs() < 1e-8 && ce > cs, || {
        format!("depolarizing η=0.5: CE {ce}, CS {cs}")
    })?;
    Ok(format!("100 random channels, min CE − CS = {margin:.3e}; depolarizing 0.5: CE {ce:.4} > CS {cs:.4}"))
}

fn unitary_edge() -> Outcome {
    let ch = unitary();
    let cs = cs_bound(&ch).map_err(|e| e.to_string())?;
    ensure(cs.eps_plus == 0.0 && cs.eps_minus == 0.0 && cs.bound_const.is_none(), || {
        format!("ε± = {}, {}", cs.eps_plus, cs.eps_minus)
    })?;
    ensure(cs.classification != Classification::PhiNonextremal, || "classified non-extremal".into())?;
    ensure(
        matches!(beta_constraint_solve(&ch).map_err(|e| e.to_string())?, BetaConstraint::Infeasible { .. }),
        || "β = 0 unexpectedly solvable".into(),
    )?;
    ensure(!ce_sdp_bound(&ch).map_err(|e| e.to_string())?.feasible, || "CE reported feasible".into())?;
    for n in 1..=20usize {
        let v = finite_n_bound(&ch, &HMatrix::zero(1), n).map_err(|e| e.to_string())?;
        let n2 = (n * n) as f64;
        ensure((v - n2).abs() <= 1e-12 * n2, || format!("N={n}: {v}"))?;
    }
    Ok("ε± = 0, β = 0 infeasible (HS not excluded), finite-N bound = N² for N ≤ 20".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 Closed-form CE constants", closed_form_constants),
        ("2 CS closed forms", cs_closed_forms),
        ("3 Extremality pattern", extremality_pattern),
        ("4 Reference h optimality", reference_h_optimal),
        ("5 Sandwich property", sandwich),
        ("6 Heisenberg crossover", crossover),
        ("7 Enhancement at eta = 0.62", lossy_enhancement),
        ("8 CE dominates CS", ce_dominates_cs),
        ("9 Unitary edge case", unitary_edge),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
