//! Symmetric cones of the standard form and their Euclidean projections.
//!
//! The solver's cone is a Cartesian product `{0}^z x R+^p x SOC(q_1) x ...`
//! laid out in that order. Projections run in place on a caller-provided
//! buffer because they sit on the per-iteration hot path; pure variants exist
//! for tests.

use serde::{Deserialize, Serialize};

use crate::vecops::norm2;
use crate::Error;

/// Cartesian-product cone description.
///
/// `soc_dims` holds the total dimension of each second-order cone block; the
/// leading coordinate of a block is the cone's "t".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub zero_dim: usize,
    pub nonneg_dim: usize,
    pub soc_dims: Vec<usize>,
}

impl ConeSpec {
    pub fn new(zero_dim: usize, nonneg_dim: usize, soc_dims: Vec<usize>) -> Self {
        Self {
            zero_dim,
            nonneg_dim,
            soc_dims,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.zero_dim + self.nonneg_dim + self.soc_dims.iter().sum::<usize>()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some(&d) = self.soc_dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidArgument(format!(
                "second-order cone block must have dimension >= 1, got {d}"
            )));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<(), Error> {
        if len != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {len}, cone expects {}",
                self.total_dim()
            )));
        }
        Ok(())
    }
}

fn project_soc(block: &mut [f64]) {
    let (t, z) = block.split_first_mut().expect("soc block dim >= 1");
    let nz = norm2(z);
    if nz <= *t {
        return;
    }
    if nz <= -*t {
        *t = 0.0;
        z.fill(0.0);
        return;
    }
    // Strictly between the cone and its polar; nz > 0 here.
    let s = 0.5 * (nz + *t);
    let scale = s / nz;
    *t = s;
    for zi in z.iter_mut() {
        *zi *= scale;
    }
}

/// Project `x` onto the cone, in place.
pub fn project_cone_in_place(x: &mut [f64], spec: &ConeSpec) -> Result<(), Error> {
    spec.check_len(x.len())?;
    let (zero, rest) = x.split_at_mut(spec.zero_dim);
    zero.fill(0.0);
    let (nonneg, mut socs) = rest.split_at_mut(spec.nonneg_dim);
    for v in nonneg.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    for &d in &spec.soc_dims {
        let (block, tail) = socs.split_at_mut(d);
        project_soc(block);
        socs = tail;
    }
    Ok(())
}

/// Project `x` onto the dual cone, in place. The dual of the zero cone is
/// free space; nonnegative and second-order cones are self-dual.
pub fn project_dual_cone_in_place(x: &mut [f64], spec: &ConeSpec) -> Result<(), Error> {
    spec.check_len(x.len())?;
    let (_free, rest) = x.split_at_mut(spec.zero_dim);
    let (nonneg, mut socs) = rest.split_at_mut(spec.nonneg_dim);
    for v in nonneg.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    for &d in &spec.soc_dims {
        let (block, tail) = socs.split_at_mut(d);
        project_soc(block);
        socs = tail;
    }
    Ok(())
}

/// Pure variant of [`project_cone_in_place`].
pub fn project_cone(x: &[f64], spec: &ConeSpec) -> Result<Vec<f64>, Error> {
    let mut out = x.to_vec();
    project_cone_in_place(&mut out, spec)?;
    Ok(out)
}

/// Pure variant of [`project_dual_cone_in_place`].
pub fn project_dual_cone(x: &[f64], spec: &ConeSpec) -> Result<Vec<f64>, Error> {
    let mut out = x.to_vec();
    project_dual_cone_in_place(&mut out, spec)?;
    Ok(out)
}

/// Worst per-block violation of cone membership (0 for members).
pub fn membership_violation(x: &[f64], spec: &ConeSpec) -> f64 {
    let mut worst = 0.0f64;
    let (zero, rest) = x.split_at(spec.zero_dim);
    for v in zero {
        worst = worst.max(v.abs());
    }
    let (nonneg, mut socs) = rest.split_at(spec.nonneg_dim);
    for v in nonneg {
        worst = worst.max(-v);
    }
    for &d in &spec.soc_dims {
        let (block, tail) = socs.split_at(d);
        worst = worst.max(norm2(&block[1..]) - block[0]);
        socs = tail;
    }
    worst.max(0.0)
}

/// Worst per-block violation of dual-cone membership.
pub fn dual_membership_violation(x: &[f64], spec: &ConeSpec) -> f64 {
    let mut worst = 0.0f64;
    let (_free, rest) = x.split_at(spec.zero_dim);
    let (nonneg, mut socs) = rest.split_at(spec.nonneg_dim);
    for v in nonneg {
        worst = worst.max(-v);
    }
    for &d in &spec.soc_dims {
        let (block, tail) = socs.split_at(d);
        worst = worst.max(norm2(&block[1..]) - block[0]);
        socs = tail;
    }
    worst.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn soc_point_inside_is_fixed() {
        let spec = ConeSpec::new(0, 0, vec![3]);
        let p = project_cone(&[2.0, 1.0, 0.0], &spec).unwrap();
        assert_close(&p, &[2.0, 1.0, 0.0], 0.0);
    }

    #[test]
    fn soc_boundary_formula() {
        let spec = ConeSpec::new(0, 0, vec![2]);
        let p = project_cone(&[0.0, 1.0], &spec).unwrap();
        assert_close(&p, &[0.5, 0.5], 1e-15);
    }

    #[test]
    fn nonneg_clamps() {
        let spec = ConeSpec::new(0, 2, vec![]);
        let p = project_cone(&[-3.0, 4.0], &spec).unwrap();
        assert_close(&p, &[0.0, 4.0], 0.0);
    }

    #[test]
    fn dual_of_zero_cone_is_free() {
        let spec = ConeSpec::new(2, 0, vec![]);
        let p = project_dual_cone(&[-5.0, 7.0], &spec).unwrap();
        assert_close(&p, &[-5.0, 7.0], 0.0);
    }

    #[test]
    fn soc_is_self_dual() {
        let spec = ConeSpec::new(0, 0, vec![2]);
        let p = project_dual_cone(&[0.0, 1.0], &spec).unwrap();
        assert_close(&p, &[0.5, 0.5], 1e-15);
    }

    #[test]
    fn dual_blockwise() {
        let spec = ConeSpec::new(1, 1, vec![]);
        let p = project_dual_cone(&[-1.0, -1.0], &spec).unwrap();
        assert_close(&p, &[-1.0, 0.0], 0.0);
    }

    #[test]
    fn deep_interior_of_polar_projects_to_zero() {
        let spec = ConeSpec::new(0, 0, vec![3]);
        let p = project_cone(&[-5.0, 0.3, -0.4], &spec).unwrap();
        assert_close(&p, &[0.0, 0.0, 0.0], 0.0);
        // zero z with negative t never evaluates z/||z||
        let p = project_cone(&[-1.0, 0.0, 0.0], &spec).unwrap();
        assert_close(&p, &[0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let spec = ConeSpec::new(1, 1, vec![2]);
        assert!(project_cone(&[1.0, 2.0], &spec).is_err());
        let mut buf = vec![0.0; 3];
        assert!(project_cone_in_place(&mut buf, &spec).is_err());
    }

    fn random_spec_and_vec(seed: u64) -> (ConeSpec, Vec<f64>) {
        let mut rng = stream(seed, "cones/random");
        let spec = ConeSpec::new(
            rng.gen_range(0..4),
            rng.gen_range(0..4),
            (0..rng.gen_range(0..3usize))
                .map(|_| rng.gen_range(1..6))
                .collect(),
        );
        let x: Vec<f64> = (0..spec.total_dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        (spec, x)
    }

    #[test]
    fn idempotence_and_membership() {
        for seed in 0..500 {
            let (spec, x) = random_spec_and_vec(seed);
            let p = project_cone(&x, &spec).unwrap();
            let pp = project_cone(&p, &spec).unwrap();
            assert_close(&pp, &p, 1e-14);
            assert!(membership_violation(&p, &spec) <= 1e-12);
            let d = project_dual_cone(&x, &spec).unwrap();
            assert!(dual_membership_violation(&d, &spec) <= 1e-12);
        }
    }

    #[test]
    fn moreau_decomposition() {
        for seed in 0..500 {
            let (spec, x) = random_spec_and_vec(seed);
            let p = project_cone(&x, &spec).unwrap();
            let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
            let q = project_dual_cone(&neg_x, &spec).unwrap();
            for i in 0..x.len() {
                assert!((x[i] - (p[i] - q[i])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn projection_is_nonexpansive() {
        for seed in 0..200 {
            let (spec, x) = random_spec_and_vec(seed);
            let mut rng = stream(seed, "cones/pair");
            let y: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let px = project_cone(&x, &spec).unwrap();
            let py = project_cone(&y, &spec).unwrap();
            let d_proj: f64 = px.iter().zip(&py).map(|(a, b)| (a - b) * (a - b)).sum();
            let d_orig: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d_proj.sqrt() <= d_orig.sqrt() + 1e-12);
        }
    }
}
