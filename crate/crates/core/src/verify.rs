//! The trusted oracle and the comparison machinery.
//!
//! [`reference_simulate`] is a deliberately plain double-precision triple loop
//! over arrays of `[f64; 3]`. It shares no code with the ladder kernels; it
//! only follows the same arithmetic order (ascending `j`, the same pair
//! expression and Leapfrog update), which is what makes the strict rungs
//! comparable bit for bit.

use serde::Serialize;

use crate::physics::{total_energy, total_momentum, ParticleSystem, Precision, SimulationConfig, Vec3};
use crate::{Error, Real, Result};

/// Default guard added to relative-error denominators.
pub const DEFAULT_GUARD: f64 = 1e-12;

/// Relative position tolerance for relaxed double-precision variants.
pub const RELAXED_TOL_DOUBLE: f64 = 1e-6;
/// Relative position tolerance for any single-precision variant.
pub const TOL_SINGLE: f64 = 1e-3;

/// Runs the oracle. `config.precision` is ignored: the oracle is always double.
pub fn reference_simulate(system: &ParticleSystem<f64>, config: &SimulationConfig) -> Result<ParticleSystem<f64>> {
    config.validate()?;
    system.validate()?;
    let config = SimulationConfig {
        precision: Precision::Double,
        ..config.clone()
    };

    let n = system.len();
    let mut pos: Vec<[f64; 3]> = (0..n).map(|i| to_array(system.position(i))).collect();
    let mut vel: Vec<[f64; 3]> = (0..n).map(|i| to_array(system.velocity(i))).collect();
    let mass: Vec<f64> = system.masses().to_vec();
    let mut acc = vec![[0.0f64; 3]; n];
    let (g, dt) = (config.g, config.dt);
    let eps2 = config.softening * config.softening;

    for _ in 0..config.steps {
        for i in 0..n {
            let mut sum = [0.0f64; 3];
            for j in 0..n {
                let d = [pos[j][0] - pos[i][0], pos[j][1] - pos[i][1], pos[j][2] - pos[i][2]];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + eps2;
                if r2 > 0.0 {
                    let scale = g * mass[j] / (r2 * r2.sqrt());
                    for c in 0..3 {
                        sum[c] += d[c] * scale;
                    }
                } else {
                    // the kernels add an exact +0 for a zero-distance pair
                    for s in &mut sum {
                        *s += 0.0;
                    }
                }
            }
            acc[i] = sum;
        }
        for i in 0..n {
            for c in 0..3 {
                let dv = acc[i][c] * dt;
                pos[i][c] += (vel[i][c] + dv / 2.0) * dt;
                vel[i][c] += dv;
            }
        }
    }

    let positions: Vec<Vec3<f64>> = pos.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
    let velocities: Vec<Vec3<f64>> = vel.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect();
    let mut out = ParticleSystem::from_bodies(&mass, &positions, &velocities)?;
    if config.steps > 0 {
        let accs: Vec<Vec3<f64>> = acc.iter().map(|a| Vec3::new(a[0], a[1], a[2])).collect();
        out.set_accelerations(&accs)?;
    }
    Ok(out)
}

fn to_array(v: Vec3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub max_rel_pos_error: f64,
    pub max_rel_vel_error: f64,
    /// Body with the largest relative position error.
    pub argmax_body: usize,
    pub bitwise_equal: bool,
}

/// Compares `candidate` against `reference`, per component
/// `|Δ| / (|reference| + guard)`. Bitwise equality requires equal precisions.
pub fn compare_states<A: Real, B: Real>(
    candidate: &ParticleSystem<A>,
    reference: &ParticleSystem<B>,
    guard: f64,
) -> Result<ComparisonReport> {
    if candidate.len() != reference.len() {
        return Err(Error::SizeMismatch {
            left: candidate.len(),
            right: reference.len(),
        });
    }
    let rel = |a: Vec3<f64>, r: Vec3<f64>| {
        [(a.x, r.x), (a.y, r.y), (a.z, r.z)]
            .iter()
            .map(|&(a, r)| (a - r).abs() / (r.abs() + guard))
            .fold(0.0f64, f64::max)
    };

    let mut report = ComparisonReport {
        max_rel_pos_error: 0.0,
        max_rel_vel_error: 0.0,
        argmax_body: 0,
        bitwise_equal: A::PRECISION == B::PRECISION,
    };
    for i in 0..candidate.len() {
        let pos_err = rel(candidate.position(i).to_f64(), reference.position(i).to_f64());
        let vel_err = rel(candidate.velocity(i).to_f64(), reference.velocity(i).to_f64());
        if pos_err > report.max_rel_pos_error {
            report.max_rel_pos_error = pos_err;
            report.argmax_body = i;
        }
        report.max_rel_vel_error = report.max_rel_vel_error.max(vel_err);
    }
    if report.bitwise_equal {
        // same precision, so widening preserves bit identity
        report.bitwise_equal = candidate.cast::<f64>().bitwise_eq(&reference.cast::<f64>());
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    /// `|P(t) − P(0)| / (Σ m_i·|v_i(0)| + ι)`.
    pub momentum_drift: f64,
    /// `|E(t) − E(0)| / (|E(0)| + ι)`.
    pub energy_drift: f64,
}

/// Guard against zero denominators in the drift ratios.
const IOTA: f64 = f64::MIN_POSITIVE;

/// Relative momentum and energy drift between two states, evaluated in double
/// precision.
pub fn check_conservation<T: Real>(
    initial: &ParticleSystem<T>,
    final_state: &ParticleSystem<T>,
    g: f64,
    softening: f64,
) -> Result<ConservationReport> {
    if initial.len() != final_state.len() {
        return Err(Error::SizeMismatch {
            left: initial.len(),
            right: final_state.len(),
        });
    }
    let (a, b) = (initial.cast::<f64>(), final_state.cast::<f64>());
    let p0 = total_momentum(&a);
    let p1 = total_momentum(&b);
    let scale: f64 = (0..a.len()).map(|i| a.mass(i) * a.velocity(i).norm()).sum();
    let e0 = total_energy(&a, g, softening);
    let e1 = total_energy(&b, g, softening);
    Ok(ConservationReport {
        momentum_drift: (p1 - p0).norm() / (scale + IOTA),
        energy_drift: (e1 - e0).abs() / (e0.abs() + IOTA),
    })
}
