//! Solver integration tests: analytic LPs, certificates, determinism,
//! warm starts, and agreement with a tight-tolerance self-oracle on random
//! feasible SOCPs.

use cranopt::cones::{dual_membership_violation, membership_violation, ConeSpec};
use cranopt::solver::{
    check_termination, equilibrate, residuals, solve, ConeProgram, HsdeIterate, Solver,
    SolveStatus, SolverSettings, Termination, WarmStart,
};
use cranopt::sparse::CscMatrix;
use cranopt::rng::stream;
use rand::Rng;

fn lp_1var() -> ConeProgram {
    // min nu  s.t.  nu >= 1  <=>  -nu + mu = -1, mu >= 0
    ConeProgram {
        a: CscMatrix::from_triplets(1, 1, vec![(0, 0, -1.0)]).unwrap(),
        b: vec![-1.0],
        c: vec![1.0],
        cone: ConeSpec::new(0, 1, vec![]),
    }
}

fn infeasible_lp() -> ConeProgram {
    // min 0  s.t.  nu >= 1  and  -nu >= 0
    ConeProgram {
        a: CscMatrix::from_triplets(2, 1, vec![(0, 0, -1.0), (1, 0, 1.0)]).unwrap(),
        b: vec![-1.0, 0.0],
        c: vec![0.0],
        cone: ConeSpec::new(0, 2, vec![]),
    }
}

#[test]
fn one_var_lp_reaches_analytic_optimum() {
    let out = solve(&lp_1var(), &SolverSettings::default()).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!((out.primal[0] - 1.0).abs() < 1e-3, "nu = {}", out.primal[0]);
    assert!((out.objective - 1.0).abs() < 1e-3);
}

#[test]
fn contradictory_lp_yields_primal_certificate() {
    let prog = infeasible_lp();
    let out = solve(&prog, &SolverSettings::default()).unwrap();
    assert_eq!(out.status, SolveStatus::PrimalInfeasible);
    let y = out.certificate.expect("certificate");
    assert!(y.iter().all(|&v| v >= -1e-9), "y in dual cone");
    let bty: f64 = prog.b.iter().zip(&y).map(|(b, y)| b * y).sum();
    assert!(bty < 0.0);
}

#[test]
fn unbounded_lp_yields_dual_certificate() {
    // min -nu s.t. nu >= 0: unbounded below.
    let prog = ConeProgram {
        a: CscMatrix::from_triplets(1, 1, vec![(0, 0, -1.0)]).unwrap(),
        b: vec![0.0],
        c: vec![-1.0],
        cone: ConeSpec::new(0, 1, vec![]),
    };
    let out = solve(&prog, &SolverSettings::default()).unwrap();
    assert_eq!(out.status, SolveStatus::DualInfeasible);
    let nu = out.certificate.expect("certificate");
    let ctnu: f64 = prog.c.iter().zip(&nu).map(|(c, v)| c * v).sum();
    assert!(ctnu < 0.0);
}

#[test]
fn trivial_program_returns_immediately() {
    let prog = ConeProgram {
        a: CscMatrix::zeros(1, 1),
        b: vec![0.0],
        c: vec![0.0],
        cone: ConeSpec::new(1, 0, vec![]),
    };
    let out = solve(&prog, &SolverSettings::default()).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert_eq!(out.iterations, 0);
}

/// Random feasible SOCP with a strictly feasible primal/dual pair baked in.
fn random_feasible_socp(seed: u64, n: usize, m: usize, socs: usize) -> ConeProgram {
    let mut rng = stream(seed, "tests/socp");
    assert!(m > socs * 3);
    let mut soc_dims = Vec::new();
    let mut remaining = m;
    for i in 0..socs {
        let d = if i + 1 == socs {
            remaining - (socs - 1 - i) * 3
        } else {
            rng.gen_range(3..=(remaining - (socs - 1 - i) * 3).min(8))
        };
        soc_dims.push(d);
        remaining -= d;
    }
    let mut nonneg = remaining;
    // keep a couple of equality rows sometimes
    let zero = if nonneg >= 2 && rng.gen_bool(0.5) { 1 } else { 0 };
    nonneg -= zero;
    let cone = ConeSpec::new(zero, nonneg, soc_dims.clone());

    let mut triplets = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.gen_bool(0.25) {
                triplets.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let a = CscMatrix::from_triplets(m, n, triplets).unwrap();

    // Strictly feasible slack: zero block 0, nonneg block 1, SOC blocks (2, e/2).
    let mut mu0 = vec![0.0; m];
    for v in mu0.iter_mut().skip(zero).take(nonneg) {
        *v = 1.0;
    }
    let mut base = zero + nonneg;
    for &d in &soc_dims {
        mu0[base] = 2.0;
        for v in mu0.iter_mut().skip(base + 1).take(d - 1) {
            *v = rng.gen_range(-0.3..0.3);
        }
        base += d;
    }
    // Strictly interior dual point, same construction.
    let mut y0 = vec![0.0; m];
    for (i, v) in y0.iter_mut().enumerate() {
        if i < zero {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    for v in y0.iter_mut().skip(zero).take(nonneg) {
        *v = 1.0;
    }
    let mut base = zero + nonneg;
    for &d in &soc_dims {
        y0[base] = 2.0;
        for v in y0.iter_mut().skip(base + 1).take(d - 1) {
            *v = rng.gen_range(-0.3..0.3);
        }
        base += d;
    }

    let nu0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut b = vec![0.0; m];
    a.matvec(&nu0, &mut b);
    for i in 0..m {
        b[i] += mu0[i];
    }
    let mut c = vec![0.0; n];
    a.matvec_transpose(&y0, &mut c);
    for v in c.iter_mut() {
        *v = -*v;
    }
    ConeProgram { a, b, c, cone }
}

#[test]
fn random_socps_match_tight_self_oracle() {
    // Smaller sibling of the acceptance criterion; keeps unit runtime modest.
    for seed in 0..10u64 {
        let prog = random_feasible_socp(seed, 20, 40, 3);
        let out = solve(&prog, &SolverSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal, "seed {seed}");

        let mut tight = SolverSettings::with_eps(1e-9);
        tight.max_iters = 1_000_000;
        let reference = solve(&prog, &tight).unwrap();
        assert_eq!(reference.status, SolveStatus::Optimal, "seed {seed}");
        let denom = reference.objective.abs().max(1e-6);
        let rel = (out.objective - reference.objective).abs() / denom;
        assert!(rel < 5e-3, "seed {seed}: relative objective gap {rel}");

        // Optimal implies membership and complementary slackness.
        assert!(membership_violation(&out.slack, &prog.cone) <= 1e-6);
        assert!(dual_membership_violation(&out.dual, &prog.cone) <= 1e-6);
        let comp: f64 = out.slack.iter().zip(&out.dual).map(|(s, y)| s * y).sum();
        assert!(comp.abs() <= 1e-4 * (1.0 + out.objective.abs()) * 10.0);
    }
}

#[test]
fn solves_are_bitwise_deterministic() {
    let prog = random_feasible_socp(42, 16, 30, 2);
    let s = SolverSettings::default();
    let a = solve(&prog, &s).unwrap();
    let b = solve(&prog, &s).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    for (x, y) in a.primal.iter().zip(&b.primal) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn cached_solver_reuse_is_bitwise_identical() {
    let prog = random_feasible_socp(7, 16, 30, 2);
    let settings = SolverSettings::default();
    let solver = Solver::new(&prog, &settings).unwrap();
    let once = solver.solve(&settings).unwrap();
    let again = solver.solve(&settings).unwrap();
    let fresh = solve(&prog, &settings).unwrap();
    for (x, y) in once.primal.iter().zip(&again.primal) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (x, y) in once.primal.iter().zip(&fresh.primal) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn warm_start_from_solution_terminates_quickly() {
    let prog = random_feasible_socp(11, 20, 40, 3);
    let settings = SolverSettings::default();
    let out = solve(&prog, &settings).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    let mut warm = settings.clone();
    warm.warm_start = Some(WarmStart {
        primal: out.primal.clone(),
        dual: out.dual.clone(),
        slack: out.slack.clone(),
    });
    let rerun = solve(&prog, &warm).unwrap();
    assert_eq!(rerun.status, SolveStatus::Optimal);
    assert!(rerun.iterations <= 25, "took {} iterations", rerun.iterations);
}

#[test]
fn status_invariant_under_positive_scaling() {
    let prog = random_feasible_socp(3, 14, 28, 2);
    let out = solve(&prog, &SolverSettings::default()).unwrap();

    let mut scaled = prog.clone();
    let s_ab = 37.5;
    let s_c = 0.014;
    for v in scaled.a.values_mut() {
        *v *= s_ab;
    }
    for v in scaled.b.iter_mut() {
        *v *= s_ab;
    }
    for v in scaled.c.iter_mut() {
        *v *= s_c;
    }
    let out2 = solve(&scaled, &SolverSettings::default()).unwrap();
    assert_eq!(out.status, out2.status);
    for (x, y) in out.primal.iter().zip(&out2.primal) {
        assert!((x - y).abs() <= 1e-2 * (1.0 + x.abs()), "{x} vs {y}");
    }
}

#[test]
fn residual_best_is_monotone_in_iteration_cap() {
    let prog = random_feasible_socp(5, 20, 40, 3);
    let mut prev = f64::INFINITY;
    for cap in [5usize, 20, 80, 320] {
        let mut s = SolverSettings::with_eps(1e-12);
        s.max_iters = cap;
        let out = solve(&prog, &s).unwrap();
        let cur = out.residuals.max();
        assert!(cur <= prev + 1e-15, "cap {cap}: {cur} > {prev}");
        prev = cur;
    }
}

#[test]
fn farkas_pair_classified_as_primal_infeasible() {
    let prog = infeasible_lp();
    // y = (1, 1): A^T y = 0, b^T y = -1, y in dual cone.
    let iterate = HsdeIterate {
        u: vec![0.0, 1.0, 1.0, 0.0],
        v: vec![0.0, 0.0, 0.0, 1.0],
    };
    match check_termination(&prog, &iterate, &SolverSettings::default()) {
        Termination::PrimalInfeasible { certificate } => {
            let bty: f64 = prog.b.iter().zip(&certificate).map(|(b, y)| b * y).sum();
            assert!((bty + 1.0).abs() < 1e-12);
        }
        _ => panic!("expected primal infeasibility"),
    }
}

#[test]
fn exact_kkt_point_is_optimal_and_large_gap_continues() {
    let prog = lp_1var();
    // nu = 1, mu = 0, y = 1 solves the KKT system exactly.
    let kkt = HsdeIterate {
        u: vec![1.0, 1.0, 1.0],
        v: vec![0.0, 0.0, 0.0],
    };
    assert!(matches!(
        check_termination(&prog, &kkt, &SolverSettings::default()),
        Termination::Optimal { .. }
    ));
    let res = residuals(&prog, &[1.0], &[1.0], &[0.0]);
    assert!(res.max() < 1e-15);

    // A candidate with a huge gap keeps iterating.
    let far = HsdeIterate {
        u: vec![11.0, 0.0, 1.0],
        v: vec![0.0, 10.0, 0.0],
    };
    assert!(matches!(
        check_termination(&prog, &far, &SolverSettings::default()),
        Termination::Continue { .. }
    ));
}

#[test]
fn equilibration_balances_and_round_trips() {
    // diag(1e6, 1e-6) system
    let prog = ConeProgram {
        a: CscMatrix::from_triplets(2, 2, vec![(0, 0, 1e6), (1, 1, 1e-6)]).unwrap(),
        b: vec![1.0, 1.0],
        c: vec![1.0, 1.0],
        cone: ConeSpec::new(2, 0, vec![]),
    };
    let (scaled, equi) = equilibrate(&prog, 10);
    let mut row_norm = vec![0.0f64; 2];
    for (i, _, v) in scaled.a.triplets() {
        row_norm[i] = row_norm[i].max(v.abs());
    }
    for r in &row_norm {
        assert!((0.5..=2.0).contains(r), "row norm {r}");
    }
    let back = equi.unscale_program(&scaled);
    for ((_, _, v0), (_, _, v1)) in prog.a.triplets().zip(back.a.triplets()) {
        assert!((v0 - v1).abs() <= 1e-12 * v0.abs());
    }
    for (x, y) in prog.b.iter().zip(&back.b) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (x, y) in prog.c.iter().zip(&back.c) {
        assert_eq!(x.to_bits(), y.to_bits());
    }

    // Already equilibrated matrix is a fixed point.
    let eye = ConeProgram {
        a: CscMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, -1.0)]).unwrap(),
        b: vec![1.0, 1.0],
        c: vec![1.0, 1.0],
        cone: ConeSpec::new(2, 0, vec![]),
    };
    let (_, equi) = equilibrate(&eye, 10);
    assert!(equi.row_scale.iter().all(|&r| r == 1.0));
    assert!(equi.col_scale.iter().all(|&c| c == 1.0));
}

#[test]
fn json_round_trip_preserves_program() {
    let prog = random_feasible_socp(9, 8, 14, 1);
    let json = prog.to_json();
    let back = ConeProgram::from_json(&json).unwrap();
    assert!(prog.a.identical(&back.a));
    assert_eq!(prog.b, back.b);
    assert_eq!(prog.c, back.c);
    assert_eq!(prog.cone, back.cone);
}
