//! Particle state, pairwise gravitation, the Leapfrog update and the
//! conservation diagnostics used by verification.
//!
//! Bodies accumulate acceleration directly: the body's own mass cancels
//! between the law of gravitation and `F = m·a`, so per-pair forces are never
//! formed. With softening `ε`, body `i` feels
//!
//! ```text
//! a_i = Σ_j G · m_j · d_ij / (|d_ij|² + ε²)^(3/2),   d_ij = p_j − p_i
//! ```
//!
//! where the sum runs over every `j` in ascending order, including `j = i`.
//! The self-pair has `d = 0` and contributes an exact zero.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Gravitational constant in SI units.
pub const DEFAULT_G: f64 = 6.674e-11;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SOFTENING: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }
}

impl<T: Real> Vec3<T> {
    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn norm_squared(self) -> T {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_f64(self) -> Vec3<f64> {
        Vec3::new(self.x.as_f64(), self.y.as_f64(), self.z.as_f64())
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::from_f64(self.x.as_f64()),
            U::from_f64(self.y.as_f64()),
            U::from_f64(self.z.as_f64()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        self.x = self.x + rhs.x;
        self.y = self.y + rhs.y;
        self.z = self.z + rhs.z;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "f32" => Ok(Precision::Single),
            "double" | "f64" => Ok(Precision::Double),
            other => Err(Error::InvalidConfig(format!("unknown precision `{other}`"))),
        }
    }
}

/// Requested worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threads {
    /// One worker per logical processor.
    Auto,
    Count(usize),
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) => Err(Error::InvalidConfig("thread count must be positive".into())),
            Ok(n) => Ok(Threads::Count(n)),
            Err(_) => Err(Error::InvalidConfig(format!("invalid thread count `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    pub steps: usize,
    pub g: f64,
    pub softening: f64,
    pub precision: Precision,
    pub threads: Threads,
    /// Tile edge for the blocked variant; ignored by the others.
    pub block_size: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            dt: DEFAULT_DT,
            steps: 10,
            g: DEFAULT_G,
            softening: DEFAULT_SOFTENING,
            precision: Precision::Double,
            threads: Threads::Auto,
            block_size: None,
        }
    }
}

impl SimulationConfig {
    /// Checks the variant-independent parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::InvalidConfig(format!("g must be positive, got {}", self.g)));
        }
        if !(self.softening.is_finite() && self.softening >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "softening must be non-negative, got {}",
                self.softening
            )));
        }
        if self.threads == Threads::Count(0) {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        Ok(())
    }
}

/// Structure-of-arrays state of `n` bodies.
///
/// The acceleration arrays are a work buffer; they are not part of the
/// physical state and are ignored by [`ParticleSystem::bitwise_eq`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem<T> {
    pub(crate) px: Vec<T>,
    pub(crate) py: Vec<T>,
    pub(crate) pz: Vec<T>,
    pub(crate) vx: Vec<T>,
    pub(crate) vy: Vec<T>,
    pub(crate) vz: Vec<T>,
    pub(crate) mass: Vec<T>,
    pub(crate) ax: Vec<T>,
    pub(crate) ay: Vec<T>,
    pub(crate) az: Vec<T>,
}

impl<T: Real> ParticleSystem<T> {
    /// Builds a system from per-body masses, positions and velocities,
    /// checking every invariant.
    pub fn from_bodies(masses: &[T], positions: &[Vec3<T>], velocities: &[Vec3<T>]) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvalidSystem("a system needs at least one body".into()));
        }
        if positions.len() != n || velocities.len() != n {
            return Err(Error::InvalidSystem(format!(
                "{} masses, {} positions, {} velocities",
                n,
                positions.len(),
                velocities.len()
            )));
        }
        let zeros = vec![T::zero(); n];
        let system = ParticleSystem {
            px: positions.iter().map(|p| p.x).collect(),
            py: positions.iter().map(|p| p.y).collect(),
            pz: positions.iter().map(|p| p.z).collect(),
            vx: velocities.iter().map(|v| v.x).collect(),
            vy: velocities.iter().map(|v| v.y).collect(),
            vz: velocities.iter().map(|v| v.z).collect(),
            mass: masses.to_vec(),
            ax: zeros.clone(),
            ay: zeros.clone(),
            az: zeros,
        };
        system.validate()?;
        Ok(system)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mass.len();
        if n == 0 {
            return Err(Error::InvalidSystem("a system needs at least one body".into()));
        }
        let lens = [
            self.px.len(),
            self.py.len(),
            self.pz.len(),
            self.vx.len(),
            self.vy.len(),
            self.vz.len(),
            self.ax.len(),
            self.ay.len(),
            self.az.len(),
        ];
        if lens.iter().any(|&len| len != n) {
            return Err(Error::InvalidSystem("component arrays differ in length".into()));
        }
        for i in 0..n {
            let m = self.mass[i];
            if !(m.is_finite() && m > T::zero()) {
                return Err(Error::InvalidSystem(format!("body {i} has mass {m}")));
            }
            if !self.position(i).is_finite() || !self.velocity(i).is_finite() {
                return Err(Error::InvalidSystem(format!("body {i} has a non-finite state")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn precision(&self) -> crate::Precision {
        T::PRECISION
    }

    pub fn mass(&self, i: usize) -> T {
        self.mass[i]
    }

    pub fn position(&self, i: usize) -> Vec3<T> {
        Vec3::new(self.px[i], self.py[i], self.pz[i])
    }

    pub fn velocity(&self, i: usize) -> Vec3<T> {
        Vec3::new(self.vx[i], self.vy[i], self.vz[i])
    }

    pub fn acceleration(&self, i: usize) -> Vec3<T> {
        Vec3::new(self.ax[i], self.ay[i], self.az[i])
    }

    pub fn masses(&self) -> &[T] {
        &self.mass
    }

    pub fn positions(&self) -> Vec<Vec3<T>> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    pub fn velocities(&self) -> Vec<Vec3<T>> {
        (0..self.len()).map(|i| self.velocity(i)).collect()
    }

    pub fn accelerations(&self) -> Vec<Vec3<T>> {
        (0..self.len()).map(|i| self.acceleration(i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.len()).all(|i| self.position(i).is_finite() && self.velocity(i).is_finite())
    }

    /// Exact bit-for-bit equality of masses, positions and velocities.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        let same =
            |a: &[T], b: &[T]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits_u64() == y.to_bits_u64());
        same(&self.mass, &other.mass)
            && same(&self.px, &other.px)
            && same(&self.py, &other.py)
            && same(&self.pz, &other.pz)
            && same(&self.vx, &other.vx)
            && same(&self.vy, &other.vy)
            && same(&self.vz, &other.vz)
    }

    /// 64-bit FNV-1a digest over the bit patterns of the physical state.
    pub fn checksum(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        for i in 0..self.len() {
            for value in [
                self.mass[i],
                self.px[i],
                self.py[i],
                self.pz[i],
                self.vx[i],
                self.vy[i],
                self.vz[i],
            ] {
                for byte in value.to_bits_u64().to_le_bytes() {
                    hash ^= u64::from(byte);
                    hash = hash.wrapping_mul(PRIME);
                }
            }
        }
        hash
    }

    /// Converts every value to another precision (round to nearest).
    pub fn cast<U: Real>(&self) -> ParticleSystem<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from_f64(x.as_f64())).collect::<Vec<U>>();
        ParticleSystem {
            px: conv(&self.px),
            py: conv(&self.py),
            pz: conv(&self.pz),
            vx: conv(&self.vx),
            vy: conv(&self.vy),
            vz: conv(&self.vz),
            mass: conv(&self.mass),
            ax: conv(&self.ax),
            ay: conv(&self.ay),
            az: conv(&self.az),
        }
    }

    /// Overwrites the acceleration work buffer.
    pub fn set_accelerations(&mut self, accelerations: &[Vec3<T>]) -> Result<()> {
        if accelerations.len() != self.len() {
            return Err(Error::SizeMismatch {
                left: self.len(),
                right: accelerations.len(),
            });
        }
        for (i, a) in accelerations.iter().enumerate() {
            self.ax[i] = a.x;
            self.ay[i] = a.y;
            self.az[i] = a.z;
        }
        Ok(())
    }
}

/// A particle system whose precision is only known at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum DynSystem {
    Single(ParticleSystem<f32>),
    Double(ParticleSystem<f64>),
}

impl DynSystem {
    pub fn precision(&self) -> Precision {
        match self {
            DynSystem::Single(_) => Precision::Single,
            DynSystem::Double(_) => Precision::Double,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DynSystem::Single(s) => s.len(),
            DynSystem::Double(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn checksum(&self) -> u64 {
        match self {
            DynSystem::Single(s) => s.checksum(),
            DynSystem::Double(s) => s.checksum(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            DynSystem::Single(s) => s.is_finite(),
            DynSystem::Double(s) => s.is_finite(),
        }
    }

    /// Converts to the requested precision.
    pub fn to_precision(&self, precision: Precision) -> DynSystem {
        match (self, precision) {
            (DynSystem::Single(s), Precision::Double) => DynSystem::Double(s.cast()),
            (DynSystem::Double(s), Precision::Single) => DynSystem::Single(s.cast()),
            _ => self.clone(),
        }
    }

    pub fn to_f64(&self) -> ParticleSystem<f64> {
        match self {
            DynSystem::Single(s) => s.cast(),
            DynSystem::Double(s) => s.clone(),
        }
    }
}

impl From<ParticleSystem<f32>> for DynSystem {
    fn from(s: ParticleSystem<f32>) -> Self {
        DynSystem::Single(s)
    }
}

impl From<ParticleSystem<f64>> for DynSystem {
    fn from(s: ParticleSystem<f64>) -> Self {
        DynSystem::Double(s)
    }
}

/// Acceleration on a body at `pos_i` due to a body of mass `mass_j` at `pos_j`.
///
/// Evaluated as `d · (g·m_j / (r²·√r²))` with `r² = ((dx²+dy²)+dz²)+ε²`. A
/// zero `r²` (self-pair without softening) yields the zero vector.
#[inline(always)]
pub fn pairwise_acceleration<T: Real>(pos_i: Vec3<T>, pos_j: Vec3<T>, mass_j: T, g: T, softening: T) -> Vec3<T> {
    pair_with_eps2(pos_i, pos_j, mass_j, g, softening * softening)
}

#[inline(always)]
pub(crate) fn pair_with_eps2<T: Real>(pos_i: Vec3<T>, pos_j: Vec3<T>, mass_j: T, g: T, eps2: T) -> Vec3<T> {
    let dx = pos_j.x - pos_i.x;
    let dy = pos_j.y - pos_i.y;
    let dz = pos_j.z - pos_i.z;
    let r2 = dx * dx + dy * dy + dz * dz + eps2;
    let s = if r2 > T::zero() {
        g * mass_j / (r2 * r2.sqrt())
    } else {
        T::zero()
    };
    Vec3::new(dx * s, dy * s, dz * s)
}

/// Acceleration on every body, summing `j = 0..n` in ascending order.
pub fn compute_accelerations<T: Real>(system: &ParticleSystem<T>, config: &SimulationConfig) -> Vec<Vec3<T>> {
    let g = T::from_f64(config.g);
    let eps = T::from_f64(config.softening);
    let eps2 = eps * eps;
    let n = system.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let pi = system.position(i);
        let mut acc = Vec3::zero();
        for j in 0..n {
            acc += pair_with_eps2(pi, system.position(j), system.mass[j], g, eps2);
        }
        out.push(acc);
    }
    out
}

/// One Leapfrog update: `dv = a·dt`, `p += (v + dv/2)·dt`, `v += dv`.
pub fn integrate_step<T: Real>(system: &mut ParticleSystem<T>, accelerations: &[Vec3<T>], dt: T) -> Result<()> {
    system.set_accelerations(accelerations)?;
    let ParticleSystem {
        px,
        py,
        pz,
        vx,
        vy,
        vz,
        ax,
        ay,
        az,
        ..
    } = system;
    integrate_axis(px, vx, ax, dt);
    integrate_axis(py, vy, ay, dt);
    integrate_axis(pz, vz, az, dt);
    Ok(())
}

/// The Leapfrog update along one axis. Shared by every ladder variant.
#[inline]
pub(crate) fn integrate_axis<T: Real>(pos: &mut [T], vel: &mut [T], acc: &[T], dt: T) {
    for ((p, v), &a) in pos.iter_mut().zip(vel.iter_mut()).zip(acc) {
        let dv = a * dt;
        *p = *p + (*v + dv * T::HALF) * dt;
        *v = *v + dv;
    }
}

/// `Σ m_i·v_i` in ascending body order.
pub fn total_momentum<T: Real>(system: &ParticleSystem<T>) -> Vec3<T> {
    let mut p = Vec3::zero();
    for i in 0..system.len() {
        p += system.velocity(i) * system.mass[i];
    }
    p
}

/// Kinetic energy plus softened pair potential `−Σ_{i<j} G·m_i·m_j/√(r²+ε²)`.
pub fn total_energy<T: Real>(system: &ParticleSystem<T>, g: T, softening: T) -> T {
    let n = system.len();
    let eps2 = softening * softening;
    let mut kinetic = T::zero();
    for i in 0..n {
        kinetic = kinetic + T::HALF * system.mass[i] * system.velocity(i).norm_squared();
    }
    let mut potential = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let r2 = (system.position(j) - system.position(i)).norm_squared() + eps2;
            potential = potential - g * system.mass[i] * system.mass[j] / r2.sqrt();
        }
    }
    kinetic + potential
}
