//! Stuffing integration tests: bitwise equality against the from-scratch
//! canonicalizer, solver round trips, and the phase-rotation soundness of
//! the QoS cone form.

use cranopt::network::evaluate_sinr;
use cranopt::rng::{standard_complex, stream};
use cranopt::solver::{solve, SolveStatus, SolverSettings};
use cranopt::stuffing::{
    build_template, canonicalize_reference, extract_beamformer, DataBuffer, Family, ProblemDims,
    StuffInput,
};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

struct InstanceData {
    channels: Vec<Array2<Complex64>>,
    noise: Vec<f64>,
    targets: Vec<f64>,
    caps: Vec<f64>,
    eff: Vec<f64>,
    weights: Vec<f64>,
}

impl InstanceData {
    fn input(&self) -> StuffInput<'_> {
        StuffInput {
            channels: &self.channels,
            noise_power: &self.noise,
            sinr_target: &self.targets,
            max_transmit: &self.caps,
            drain_efficiency: &self.eff,
            group_weights: &self.weights,
        }
    }
}

fn random_instance(seed: u64, dims: &ProblemDims, gain: f64) -> InstanceData {
    let mut rng = stream(seed, "tests/stuffing-instance");
    let k = dims.users;
    let n = dims.total_antennas();
    let l = dims.num_rrhs();
    let channels: Vec<Array2<Complex64>> = (0..dims.samples)
        .map(|_| Array2::from_shape_fn((k, n), |_| standard_complex(&mut rng) * gain))
        .collect();
    InstanceData {
        channels,
        noise: (0..k).map(|_| rng.gen_range(0.05..0.2)).collect(),
        targets: (0..k).map(|_| rng.gen_range(0.5..2.0)).collect(),
        caps: (0..l).map(|_| rng.gen_range(0.5..4.0)).collect(),
        eff: (0..l).map(|_| rng.gen_range(0.5..1.5)).collect(),
        weights: (0..l).map(|_| rng.gen_range(0.1..3.0)).collect(),
    }
}

fn programs_identical(a: &cranopt::ConeProgram, b: &cranopt::ConeProgram) -> bool {
    let same_vec = |x: &[f64], y: &[f64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits())
    };
    a.a.identical(&b.a) && same_vec(&a.b, &b.b) && same_vec(&a.c, &b.c) && a.cone == b.cone
}

#[test]
fn stuffed_equals_reference_bitwise_across_families() {
    let cases = [
        (Family::PowerMin, ProblemDims::new(vec![2, 1, 2], 3)),
        (Family::GroupSparseStage1, ProblemDims::new(vec![1, 2], 2)),
        (Family::FeasibilityCheck, ProblemDims::new(vec![2, 2], 3)),
        (Family::MaxMinProbe, ProblemDims::new(vec![1, 1, 1], 2)),
        (
            Family::ScenarioScb,
            ProblemDims::with_samples(vec![1, 2], 2, 4),
        ),
    ];
    for (family, dims) in cases {
        let template = build_template(family, &dims).unwrap();
        let mut buffer = DataBuffer::default();
        for seed in 0..10u64 {
            let inst = random_instance(seed, &dims, 1.0);
            let stuffed = template.stuff_with(&inst.input(), &mut buffer).unwrap();
            let reference = canonicalize_reference(family, &dims, &inst.input()).unwrap();
            assert!(
                programs_identical(&stuffed, &reference),
                "{family:?} seed {seed}: stuffed and reference differ"
            );
        }
    }
}

#[test]
fn template_reuse_produces_solver_accepted_programs() {
    let dims = ProblemDims::new(vec![1, 1, 1], 2);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let mut buffer = DataBuffer::default();
    let settings = SolverSettings::default();
    let mut optimal = 0;
    for seed in 0..100u64 {
        let inst = random_instance(seed, &dims, 1.0);
        let prog = template.stuff_with(&inst.input(), &mut buffer).unwrap();
        let out = solve(&prog, &settings).unwrap();
        assert!(
            matches!(
                out.status,
                SolveStatus::Optimal | SolveStatus::PrimalInfeasible
            ),
            "seed {seed}: unexpected status {:?}",
            out.status
        );
        if out.status == SolveStatus::Optimal {
            optimal += 1;
        }
    }
    // channels of unit gain against modest targets: most instances solvable
    assert!(optimal > 50, "only {optimal}/100 optimal");
}

#[test]
fn restuffing_leaves_prior_programs_untouched() {
    let dims = ProblemDims::new(vec![1, 1], 2);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let inst1 = random_instance(1, &dims, 1.0);
    let inst2 = random_instance(2, &dims, 1.0);
    let prog1 = template.stuff(&inst1.input()).unwrap();
    let snapshot: Vec<u64> = prog1.a.values().iter().map(|v| v.to_bits()).collect();
    let _prog2 = template.stuff(&inst2.input()).unwrap();
    let after: Vec<u64> = prog1.a.values().iter().map(|v| v.to_bits()).collect();
    assert_eq!(snapshot, after);
}

#[test]
fn zero_channels_make_qos_infeasible() {
    let dims = ProblemDims::new(vec![1, 1], 2);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let mut inst = random_instance(0, &dims, 1.0);
    for ch in &mut inst.channels {
        ch.fill(Complex64::new(0.0, 0.0));
    }
    let prog = template.stuff(&inst.input()).unwrap();
    let mut settings = SolverSettings::default();
    settings.max_iters = 50_000;
    let out = solve(&prog, &settings).unwrap();
    assert_eq!(out.status, SolveStatus::PrimalInfeasible);
}

#[test]
fn phase_rotation_soundness_of_solutions() {
    let dims = ProblemDims::new(vec![2, 2], 3);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let settings = SolverSettings::with_eps(1e-6);
    for seed in 0..5u64 {
        let inst = random_instance(seed, &dims, 1.5);
        let prog = template.stuff(&inst.input()).unwrap();
        let out = solve(&prog, &settings).unwrap();
        if out.status != SolveStatus::Optimal {
            continue;
        }
        let v = extract_beamformer(Family::PowerMin, &dims, &out.primal).unwrap();
        let h = &inst.channels[0];

        // rotate each user's column so its signal term becomes real >= 0
        let mut v_rot = v.clone();
        for j in 0..dims.users {
            let sig: Complex64 = h
                .row(j)
                .iter()
                .zip(v.column(j))
                .map(|(hi, vi)| hi.conj() * vi)
                .sum();
            let rot = Complex64::from_polar(1.0, -sig.arg());
            for a in 0..dims.total_antennas() {
                v_rot[(a, j)] *= rot;
            }
        }
        // rotation moves no constraint norm: per-group norms identical
        for group in 0..dims.num_rrhs() {
            let range = group * 2..group * 2 + 2;
            let norm = |m: &Array2<Complex64>| -> f64 {
                range
                    .clone()
                    .map(|a| m.row(a).iter().map(|c| c.norm_sqr()).sum::<f64>())
                    .sum::<f64>()
                    .sqrt()
            };
            assert!((norm(&v) - norm(&v_rot)).abs() < 1e-12);
        }
        // signal terms now real nonnegative
        for j in 0..dims.users {
            let sig: Complex64 = h
                .row(j)
                .iter()
                .zip(v_rot.column(j))
                .map(|(hi, vi)| hi.conj() * vi)
                .sum();
            assert!(sig.im.abs() < 1e-9 * (1.0 + sig.re.abs()));
            assert!(sig.re >= -1e-9);
        }
        // and the rotated beamformer still meets the targets
        let sinr = evaluate_sinr(h, &v_rot, &inst.noise);
        for (k, s) in sinr.iter().enumerate() {
            assert!(
                *s >= inst.targets[k] - 1e-3,
                "seed {seed} user {k}: sinr {s} vs target {}",
                inst.targets[k]
            );
        }
    }
}

#[test]
fn objective_is_weighted_norm_of_solution() {
    let dims = ProblemDims::new(vec![1, 2], 2);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let settings = SolverSettings::with_eps(1e-6);
    for seed in 20..25u64 {
        let inst = random_instance(seed, &dims, 1.5);
        let prog = template.stuff(&inst.input()).unwrap();
        let out = solve(&prog, &settings).unwrap();
        if out.status != SolveStatus::Optimal {
            continue;
        }
        let v = extract_beamformer(Family::PowerMin, &dims, &out.primal).unwrap();
        let mut weighted_power = 0.0;
        let mut base = 0usize;
        for (l, &nl) in dims.antennas.iter().enumerate() {
            let g: f64 = (base..base + nl)
                .map(|a| v.row(a).iter().map(|c| c.norm_sqr()).sum::<f64>())
                .sum();
            weighted_power += g / inst.eff[l];
            base += nl;
        }
        let t = out.objective;
        assert!(
            (t * t - weighted_power).abs() <= 1e-6 * (1.0 + t * t),
            "seed {seed}: t^2 = {} vs power {}",
            t * t,
            weighted_power
        );
    }
}

#[test]
fn scenario_family_shares_beamformer_across_samples() {
    let dims = ProblemDims::with_samples(vec![1, 1], 2, 3);
    let template = build_template(Family::ScenarioScb, &dims).unwrap();
    let inst = random_instance(3, &dims, 2.0);
    let prog = template.stuff(&inst.input()).unwrap();
    // one epigraph + 2NK reals regardless of sample count
    assert_eq!(prog.num_vars(), 1 + 2 * 2 * 2);
    // K*M QoS cones + L caps + epigraph
    assert_eq!(prog.cone.soc_dims.len(), 2 * 3 + 2 + 1);
    let out = solve(&prog, &SolverSettings::default()).unwrap();
    if out.status == SolveStatus::Optimal {
        let v = extract_beamformer(Family::ScenarioScb, &dims, &out.primal).unwrap();
        for (s, h) in inst.channels.iter().enumerate() {
            let sinr = evaluate_sinr(h, &v, &inst.noise);
            for (k, val) in sinr.iter().enumerate() {
                assert!(
                    *val >= inst.targets[k] - 1e-3,
                    "sample {s} user {k}: {val}"
                );
            }
        }
    }
}

#[test]
fn dimension_mismatch_rejected() {
    let dims = ProblemDims::new(vec![1, 1], 2);
    let template = build_template(Family::PowerMin, &dims).unwrap();
    let wrong = random_instance(0, &ProblemDims::new(vec![1, 1], 3), 1.0);
    assert!(template.stuff(&wrong.input()).is_err());
}
