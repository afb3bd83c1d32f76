//! Cloud-RAN topologies, channel realizations and power accounting.
//!
//! Geometry is uniform over a square region; large-scale gains follow a
//! log-distance pathloss with log-normal shadowing and small-scale fading is
//! i.i.d. Rayleigh. All draws come from named streams so that large-scale
//! gains depend only on geometry and the shadowing seed, never on the
//! small-scale seed.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{standard_complex, standard_normal, stream};
use crate::Error;

/// Log-distance channel model parameters. Defaults: 128.1 + 37.6 log10(d_km)
/// dB pathloss, 8 dB log-normal shadowing, 10 m distance clamp.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelModel {
    pub pathloss_fixed_db: f64,
    pub pathloss_per_decade_db: f64,
    pub shadowing_std_db: f64,
    pub min_distance_m: f64,
    /// When set, divide all large-scale gains by their median so transmit
    /// SNR sweeps have a unit-gain reference.
    pub normalize_median_gain: bool,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            pathloss_fixed_db: 128.1,
            pathloss_per_decade_db: 37.6,
            shadowing_std_db: 8.0,
            min_distance_m: 10.0,
            normalize_median_gain: false,
        }
    }
}

/// RRH and user positions in meters.
#[derive(Clone, Debug)]
pub struct Topology {
    pub rrh_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
}

/// Per-RRH power model.
#[derive(Clone, Debug)]
pub struct PowerModel {
    /// Fronthaul link power saved by switching the RRH off (watts).
    pub fronthaul_w: Vec<f64>,
    pub drain_efficiency: Vec<f64>,
    pub max_transmit_w: Vec<f64>,
}

/// Per-user QoS data.
#[derive(Clone, Debug)]
pub struct QosModel {
    /// Target SINR, linear.
    pub sinr_target: Vec<f64>,
    /// Noise power (watts).
    pub noise_w: Vec<f64>,
}

/// A fully realized network instance: geometry, channel, power model, QoS.
#[derive(Clone, Debug)]
pub struct NetworkInstance {
    pub topology: Topology,
    pub antennas: Vec<usize>,
    pub power: PowerModel,
    pub qos: QosModel,
    /// users x total_antennas small-scale channel.
    pub channel: Array2<Complex64>,
    /// users x rrhs large-scale gains.
    pub gains: Array2<f64>,
}

impl NetworkInstance {
    pub fn num_rrhs(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.qos.sinr_target.len()
    }

    pub fn total_antennas(&self) -> usize {
        self.antennas.iter().sum()
    }

    /// Global antenna index range of RRH `l`.
    pub fn antenna_range(&self, l: usize) -> std::ops::Range<usize> {
        let start: usize = self.antennas[..l].iter().sum();
        start..start + self.antennas[l]
    }

    pub fn validate(&self) -> Result<(), Error> {
        let l = self.num_rrhs();
        let k = self.num_users();
        if self.topology.rrh_positions.len() != l || self.topology.user_positions.len() != k {
            return Err(Error::DimensionMismatch("topology/antenna mismatch".into()));
        }
        if self.power.fronthaul_w.len() != l
            || self.power.drain_efficiency.len() != l
            || self.power.max_transmit_w.len() != l
            || self.qos.noise_w.len() != k
        {
            return Err(Error::DimensionMismatch("power/qos lengths mismatch".into()));
        }
        if self.channel.nrows() != k || self.channel.ncols() != self.total_antennas() {
            return Err(Error::DimensionMismatch("channel shape mismatch".into()));
        }
        if self.gains.nrows() != k || self.gains.ncols() != l {
            return Err(Error::DimensionMismatch("gain shape mismatch".into()));
        }
        let positive = self.power.fronthaul_w.iter().all(|&p| p > 0.0)
            && self.power.drain_efficiency.iter().all(|&e| e > 0.0)
            && self.power.max_transmit_w.iter().all(|&p| p > 0.0)
            && self.qos.sinr_target.iter().all(|&g| g > 0.0)
            && self.qos.noise_w.iter().all(|&s| s > 0.0);
        if !positive {
            return Err(Error::InvalidArgument(
                "power model and QoS entries must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Positions i.i.d. uniform over the square `[-half_width, half_width]^2`.
pub fn generate_topology(seed: u64, rrhs: usize, users: usize, half_width: f64) -> Topology {
    let mut rrh_rng = stream(seed, "topology/rrh");
    let mut user_rng = stream(seed, "topology/user");
    let draw = |rng: &mut crate::rng::Stream| {
        [
            rng.gen_range(-half_width..=half_width),
            rng.gen_range(-half_width..=half_width),
        ]
    };
    Topology {
        rrh_positions: (0..rrhs).map(|_| draw(&mut rrh_rng)).collect(),
        user_positions: (0..users).map(|_| draw(&mut user_rng)).collect(),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite gains"));
    values[values.len() / 2]
}

/// Large-scale gains from pathloss and shadowing; depends on geometry and the
/// shadowing seed only.
pub fn large_scale_gains(
    topology: &Topology,
    model: &ChannelModel,
    shadow_seed: u64,
) -> Array2<f64> {
    let k = topology.user_positions.len();
    let l = topology.rrh_positions.len();
    let mut rng = stream(shadow_seed, "channel/shadowing");
    let mut gains = Array2::<f64>::zeros((k, l));
    for ki in 0..k {
        for li in 0..l {
            let du = topology.user_positions[ki];
            let dr = topology.rrh_positions[li];
            let dist_m = ((du[0] - dr[0]).powi(2) + (du[1] - dr[1]).powi(2))
                .sqrt()
                .max(model.min_distance_m);
            let pathloss_db = model.pathloss_fixed_db
                + model.pathloss_per_decade_db * (dist_m / 1000.0).log10();
            let shadow_db = model.shadowing_std_db * standard_normal(&mut rng);
            gains[(ki, li)] = 10f64.powf((-pathloss_db + shadow_db) / 10.0);
        }
    }
    if model.normalize_median_gain {
        let mut flat: Vec<f64> = gains.iter().copied().collect();
        let med = median(&mut flat);
        if med > 0.0 {
            gains.mapv_inplace(|g| g / med);
        }
    }
    gains
}

/// Rayleigh small-scale channel on top of large-scale gains:
/// `H[k, (l, a)] = sqrt(g[k, l]) * CN(0, 1)`.
pub fn small_scale_channel(
    gains: &Array2<f64>,
    antennas: &[usize],
    fast_seed: u64,
) -> Array2<Complex64> {
    let k = gains.nrows();
    let n: usize = antennas.iter().sum();
    let mut rng = stream(fast_seed, "channel/smallscale");
    let mut h = Array2::<Complex64>::zeros((k, n));
    for ki in 0..k {
        let mut col = 0usize;
        for (li, &nl) in antennas.iter().enumerate() {
            let scale = gains[(ki, li)].sqrt();
            for _ in 0..nl {
                h[(ki, col)] = standard_complex(&mut rng) * scale;
                col += 1;
            }
        }
    }
    h
}

/// Draw `(H, g)` for a topology; shadowing and small-scale fading use
/// separate named streams off the same seed.
pub fn sample_channel(
    topology: &Topology,
    antennas: &[usize],
    model: &ChannelModel,
    seed: u64,
) -> (Array2<Complex64>, Array2<f64>) {
    let gains = large_scale_gains(topology, model, seed);
    let h = small_scale_channel(&gains, antennas, seed);
    (h, gains)
}

/// Per-user SINR of beamformer `v` (antennas x users) under channel `h`
/// (users x antennas): signal power over interference plus noise.
pub fn evaluate_sinr(h: &Array2<Complex64>, v: &Array2<Complex64>, noise_w: &[f64]) -> Vec<f64> {
    let k = h.nrows();
    assert_eq!(v.ncols(), k);
    assert_eq!(v.nrows(), h.ncols());
    assert_eq!(noise_w.len(), k);
    let mut sinr = Vec::with_capacity(k);
    for ki in 0..k {
        let hk = h.row(ki);
        let mut signal = 0.0;
        let mut interference = 0.0;
        for j in 0..k {
            let dot: Complex64 = hk
                .iter()
                .zip(v.column(j))
                .map(|(hi, vi)| hi.conj() * vi)
                .sum();
            if j == ki {
                signal = dot.norm_sqr();
            } else {
                interference += dot.norm_sqr();
            }
        }
        sinr.push(signal / (interference + noise_w[ki]));
    }
    sinr
}

/// Network power: efficiency-weighted transmit power of the active RRHs plus
/// their fronthaul powers. Coefficients at inactive RRHs must be zero.
pub fn network_power(
    v: &Array2<Complex64>,
    antennas: &[usize],
    active: &[usize],
    power: &PowerModel,
) -> Result<f64, Error> {
    let l = antennas.len();
    if power.fronthaul_w.len() != l || power.drain_efficiency.len() != l {
        return Err(Error::DimensionMismatch("power model length mismatch".into()));
    }
    let is_active = {
        let mut mask = vec![false; l];
        for &a in active {
            if a >= l {
                return Err(Error::InvalidArgument(format!(
                    "active RRH index {a} out of range"
                )));
            }
            mask[a] = true;
        }
        mask
    };
    let mut total = 0.0;
    let mut base = 0usize;
    for (li, &nl) in antennas.iter().enumerate() {
        let group_power: f64 = (base..base + nl)
            .flat_map(|row| v.row(row).iter().map(|c| c.norm_sqr()).collect::<Vec<_>>())
            .sum();
        if is_active[li] {
            total += group_power / power.drain_efficiency[li] + power.fronthaul_w[li];
        } else if group_power > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "nonzero beamforming coefficients at inactive RRH {li}"
            )));
        }
        base += nl;
    }
    Ok(total)
}

/// Per-instance generator configuration used by experiments and tests.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub rrhs: usize,
    pub antennas_per_rrh: usize,
    pub users: usize,
    pub region_half_width_m: f64,
    #[serde(default)]
    pub channel: ChannelModel,
    /// Per-RRH fronthaul powers; length must equal `rrhs`.
    pub fronthaul_w: Vec<f64>,
    #[serde(default = "default_one")]
    pub drain_efficiency: f64,
    pub max_transmit_w: f64,
    pub noise_w: f64,
    pub sinr_target: f64,
}

fn default_one() -> f64 {
    1.0
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.rrhs == 0 || self.users == 0 || self.antennas_per_rrh == 0 {
            return Err(Error::InvalidArgument(
                "instance dimensions must be positive".into(),
            ));
        }
        if self.fronthaul_w.len() != self.rrhs {
            return Err(Error::DimensionMismatch(format!(
                "fronthaul_w has {} entries for {} RRHs",
                self.fronthaul_w.len(),
                self.rrhs
            )));
        }
        Ok(())
    }

    /// Build the instance for one seed; fully deterministic.
    pub fn build(&self, seed: u64) -> Result<NetworkInstance, Error> {
        self.validate()?;
        let topology = generate_topology(seed, self.rrhs, self.users, self.region_half_width_m);
        let antennas = vec![self.antennas_per_rrh; self.rrhs];
        let (channel, gains) = sample_channel(&topology, &antennas, &self.channel, seed);
        let inst = NetworkInstance {
            topology,
            antennas,
            power: PowerModel {
                fronthaul_w: self.fronthaul_w.clone(),
                drain_efficiency: vec![self.drain_efficiency; self.rrhs],
                max_transmit_w: vec![self.max_transmit_w; self.rrhs],
            },
            qos: QosModel {
                sinr_target: vec![self.sinr_target; self.users],
                noise_w: vec![self.noise_w; self.users],
            },
            channel,
            gains,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
