//! Phase-1 kernels for every rung plus the shared phase-2 update.
//!
//! The `SLOC-REGION` markers delimit each rung's main block for the effort
//! comparison (`nbody sloc --profile rust`).

use rayon::prelude::*;

use crate::ladder::VariantId;
use crate::physics::{integrate_axis, pair_with_eps2, ParticleSystem, SimulationConfig, Vec3};
use crate::Real;

/// Lane count of the fast-math accumulators.
const LANES: usize = 16;

/// Whether the target has hardware FMA without any per-function features.
const BASELINE_FMA: bool = cfg!(target_feature = "fma");

pub(crate) struct Params<T> {
    g: T,
    eps2: T,
    dt: T,
}

impl<T: Real> Params<T> {
    pub(crate) fn new(config: &SimulationConfig) -> Self {
        let eps = T::from_f64(config.softening);
        Params {
            g: T::from_f64(config.g),
            eps2: eps * eps,
            dt: T::from_f64(config.dt),
        }
    }
}

/// Read-only view of the positions and masses during phase 1.
#[derive(Clone, Copy)]
struct Sources<'a, T> {
    x: &'a [T],
    y: &'a [T],
    z: &'a [T],
    m: &'a [T],
}

impl<T: Real> Sources<'_, T> {
    #[inline(always)]
    fn position(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.x[j], self.y[j], self.z[j])
    }

    #[inline(always)]
    fn len(&self) -> usize {
        self.m.len()
    }
}

/// Accelerations for one contiguous run of bodies starting at `start`.
struct Rows<'a, T> {
    start: usize,
    x: &'a mut [T],
    y: &'a mut [T],
    z: &'a mut [T],
}

impl<T: Real> Rows<'_, T> {
    #[inline(always)]
    fn set(&mut self, k: usize, a: Vec3<T>) {
        self.x[k] = a.x;
        self.y[k] = a.y;
        self.z[k] = a.z;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Isa {
    Baseline,
    #[cfg(all(feature = "simd", target_arch = "x86_64"))]
    Avx2,
    #[cfg(all(feature = "simd", target_arch = "x86_64"))]
    Avx512,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Phase1 {
    Strict,
    Fold,
    Fast(Isa),
    Blocked(usize),
}

impl Phase1 {
    pub(crate) fn select(variant: VariantId, block: Option<usize>) -> Self {
        match variant {
            VariantId::SeqBaseline | VariantId::Parallel => Phase1::Strict,
            VariantId::ParallelFold => Phase1::Fold,
            VariantId::ParallelFastmath => Phase1::Fast(Isa::Baseline),
            VariantId::ParallelFastmathSimd | VariantId::ParallelFastmathAlloc => Phase1::Fast(widest_isa()),
            VariantId::ParallelBlocked => Phase1::Blocked(block.expect("blocked variant validated with a block size")),
        }
    }

    fn run<T: Real>(self, src: Sources<'_, T>, rows: Rows<'_, T>, g: T, eps2: T) {
        match self {
            Phase1::Strict => strict_rows(src, rows, g, eps2),
            Phase1::Fold => fold_rows(src, rows, g, eps2),
            Phase1::Fast(Isa::Baseline) => fast_rows::<T, BASELINE_FMA>(src, rows, g, eps2),
            #[cfg(all(feature = "simd", target_arch = "x86_64"))]
            // SAFETY: `widest_isa` only returns these after runtime detection.
            Phase1::Fast(Isa::Avx2) => unsafe { x86::fast_rows_avx2(src, rows, g, eps2) },
            #[cfg(all(feature = "simd", target_arch = "x86_64"))]
            Phase1::Fast(Isa::Avx512) => unsafe { x86::fast_rows_avx512(src, rows, g, eps2) },
            Phase1::Blocked(8) => blocked_rows::<T, 8, BASELINE_FMA>(src, rows, g, eps2),
            Phase1::Blocked(16) => blocked_rows::<T, 16, BASELINE_FMA>(src, rows, g, eps2),
            Phase1::Blocked(32) => blocked_rows::<T, 32, BASELINE_FMA>(src, rows, g, eps2),
            Phase1::Blocked(b) => unreachable!("block size {b} passed validation"),
        }
    }
}

/// One step of the single-worker baseline.
pub(crate) fn seq_step<T: Real>(state: &mut ParticleSystem<T>, p: &Params<T>) {
    // SLOC-REGION:seq-baseline
    let n = state.len();
    for i in 0..n {
        let pi = state.position(i);
        let mut acc = Vec3::zero();
        for j in 0..n {
            acc += pair_with_eps2(pi, state.position(j), state.mass[j], p.g, p.eps2);
        }
        state.ax[i] = acc.x;
        state.ay[i] = acc.y;
        state.az[i] = acc.z;
    }
    integrate_axis(&mut state.px, &mut state.vx, &state.ax, p.dt);
    integrate_axis(&mut state.py, &mut state.vy, &state.ay, p.dt);
    integrate_axis(&mut state.pz, &mut state.vz, &state.az, p.dt);
    // SLOC-END
}

/// One step of a multi-worker variant. Must run inside the variant's pool.
pub(crate) fn parallel_step<T: Real>(state: &mut ParticleSystem<T>, p: &Params<T>, phase1: Phase1, workers: usize) {
    let n = state.len();
    let chunk = n.div_ceil(workers.max(1));
    let ParticleSystem {
        px,
        py,
        pz,
        vx,
        vy,
        vz,
        mass,
        ax,
        ay,
        az,
    } = state;

    // Phase 1: one contiguous slice of bodies per worker. Returns once every
    // acceleration is written.
    let src = Sources {
        x: px,
        y: py,
        z: pz,
        m: mass,
    };
    ax.par_chunks_mut(chunk)
        .zip(ay.par_chunks_mut(chunk))
        .zip(az.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(k, ((x, y), z))| {
            let rows = Rows {
                start: k * chunk,
                x,
                y,
                z,
            };
            phase1.run(src, rows, p.g, p.eps2);
        });

    // Phase 2: advance every body. Returns once all positions are final.
    [(px, vx, &*ax), (py, vy, &*ay), (pz, vz, &*az)]
        .into_par_iter()
        .for_each(|(pos, vel, acc)| {
            pos.par_chunks_mut(chunk)
                .zip(vel.par_chunks_mut(chunk))
                .zip(acc.par_chunks(chunk))
                .for_each(|((pos, vel), acc)| integrate_axis(pos, vel, acc, p.dt));
        });
}

fn strict_rows<T: Real>(src: Sources<'_, T>, mut rows: Rows<'_, T>, g: T, eps2: T) {
    // SLOC-REGION:parallel
    for k in 0..rows.x.len() {
        let pi = src.position(rows.start + k);
        let mut acc = Vec3::zero();
        for j in 0..src.len() {
            acc += pair_with_eps2(pi, src.position(j), src.m[j], g, eps2);
        }
        rows.set(k, acc);
    }
    // SLOC-END
}

fn fold_rows<T: Real>(src: Sources<'_, T>, mut rows: Rows<'_, T>, g: T, eps2: T) {
    // SLOC-REGION:parallel-fold
    for k in 0..rows.x.len() {
        let pi = src.position(rows.start + k);
        let acc = src
            .x
            .iter()
            .zip(src.y)
            .zip(src.z)
            .zip(src.m)
            .fold(Vec3::zero(), |acc, (((&x, &y), &z), &m)| {
                acc + pair_with_eps2(pi, Vec3::new(x, y, z), m, g, eps2)
            });
        rows.set(k, acc);
    }
    // SLOC-END
}

/// Contribution of body `j` to the lane accumulators, with `G` factored out.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn fast_pair<T: Real, const FUSED: bool>(xi: T, yi: T, zi: T, xj: T, yj: T, zj: T, mj: T, eps2: T) -> (T, T, T) {
    let dx = xj - xi;
    let dy = yj - yi;
    let dz = zj - zi;
    let r2 = dz.mul_add_if::<FUSED>(dz, dy.mul_add_if::<FUSED>(dy, dx.mul_add_if::<FUSED>(dx, eps2)));
    let inv = T::one() / r2.sqrt();
    let inv = if r2 > T::zero() { inv } else { T::zero() };
    let s = mj * (inv * inv * inv);
    (dx * s, dy * s, dz * s)
}

#[inline(always)]
fn fast_rows<T: Real, const FUSED: bool>(src: Sources<'_, T>, mut rows: Rows<'_, T>, g: T, eps2: T) {
    // SLOC-REGION:parallel-fastmath
    let n = src.len();
    let full = n - n % LANES;
    for k in 0..rows.x.len() {
        let i = rows.start + k;
        let (xi, yi, zi) = (src.x[i], src.y[i], src.z[i]);
        let mut sx = [T::zero(); LANES];
        let mut sy = [T::zero(); LANES];
        let mut sz = [T::zero(); LANES];
        for base in (0..full).step_by(LANES) {
            let xs: &[T; LANES] = src.x[base..base + LANES].try_into().unwrap();
            let ys: &[T; LANES] = src.y[base..base + LANES].try_into().unwrap();
            let zs: &[T; LANES] = src.z[base..base + LANES].try_into().unwrap();
            let ms: &[T; LANES] = src.m[base..base + LANES].try_into().unwrap();
            for l in 0..LANES {
                let (ax, ay, az) = fast_pair::<T, FUSED>(xi, yi, zi, xs[l], ys[l], zs[l], ms[l], eps2);
                sx[l] = sx[l] + ax;
                sy[l] = sy[l] + ay;
                sz[l] = sz[l] + az;
            }
        }
        for j in full..n {
            let (ax, ay, az) = fast_pair::<T, FUSED>(xi, yi, zi, src.x[j], src.y[j], src.z[j], src.m[j], eps2);
            let l = j - full;
            sx[l] = sx[l] + ax;
            sy[l] = sy[l] + ay;
            sz[l] = sz[l] + az;
        }
        rows.set(k, Vec3::new(sum_lanes(&sx), sum_lanes(&sy), sum_lanes(&sz)) * g);
    }
    // SLOC-END
}

/// Rows of a block kept in registers at once.
const REGISTER_ROWS: usize = 8;

fn blocked_rows<T: Real, const B: usize, const FUSED: bool>(src: Sources<'_, T>, mut rows: Rows<'_, T>, g: T, eps2: T) {
    // SLOC-REGION:parallel-blocked
    const R: usize = REGISTER_ROWS;
    let n = src.len();
    let full = n - n % B;
    let count = rows.x.len();
    for first in (0..count).step_by(B) {
        let height = B.min(count - first);
        // Short final groups repeat their last row; the extra results are dropped.
        let row = |r: usize| rows.start + first + r.min(height - 1);
        // Arrays are sized B for want of const arithmetic; only the first B / R chunks are used.
        let pos: [[[T; R]; 3]; B] =
            std::array::from_fn(|c| [src.x, src.y, src.z].map(|axis| std::array::from_fn(|r| axis[row(c * R + r)])));
        let mut acc = [[[T::zero(); R]; 3]; B];
        for base in (0..full).step_by(B) {
            let tile = base..base + B;
            for (p, a) in pos.iter().zip(&mut acc).take(B / R) {
                row_block::<T, R, FUSED>(
                    p,
                    a,
                    &src.x[tile.clone()],
                    &src.y[tile.clone()],
                    &src.z[tile.clone()],
                    &src.m[tile.clone()],
                    eps2,
                );
            }
        }
        for (p, a) in pos.iter().zip(&mut acc).take(B / R) {
            row_block::<T, R, FUSED>(
                p,
                a,
                &src.x[full..],
                &src.y[full..],
                &src.z[full..],
                &src.m[full..],
                eps2,
            );
        }
        for r in 0..height {
            let [sx, sy, sz] = &acc[r / R];
            rows.set(first + r, Vec3::new(sx[r % R], sy[r % R], sz[r % R]) * g);
        }
    }
    // SLOC-END
}

/// Adds the pull of every source to `R` rows whose sums stay in registers.
#[inline(always)]
fn row_block<T: Real, const R: usize, const FUSED: bool>(
    pos: &[[T; R]; 3],
    acc: &mut [[T; R]; 3],
    xs: &[T],
    ys: &[T],
    zs: &[T],
    ms: &[T],
    eps2: T,
) {
    let [px, py, pz] = pos;
    let [mut sx, mut sy, mut sz] = *acc;
    for (((&xj, &yj), &zj), &mj) in xs.iter().zip(ys).zip(zs).zip(ms) {
        for r in 0..R {
            let (dx, dy, dz) = fast_pair::<T, FUSED>(px[r], py[r], pz[r], xj, yj, zj, mj, eps2);
            sx[r] = sx[r] + dx;
            sy[r] = sy[r] + dy;
            sz[r] = sz[r] + dz;
        }
    }
    *acc = [sx, sy, sz];
}

/// Pairwise tree reduction of the lane accumulators.
#[inline(always)]
fn sum_lanes<T: Real, const L: usize>(lanes: &[T; L]) -> T {
    let mut buf = *lanes;
    let mut width = L;
    while width > 1 {
        let half = width / 2;
        for l in 0..half {
            buf[l] = buf[l] + buf[l + half];
        }
        width = half;
    }
    buf[0]
}

#[cfg(all(feature = "simd", target_arch = "x86_64"))]
mod x86 {
    use super::{fast_rows, Rows, Sources};
    use crate::Real;

    #[target_feature(enable = "avx2,fma")]
    pub(super) fn fast_rows_avx2<T: Real>(src: Sources<'_, T>, rows: Rows<'_, T>, g: T, eps2: T) {
        fast_rows::<T, true>(src, rows, g, eps2)
    }

    #[target_feature(enable = "avx512f,avx512vl,avx2,fma")]
    pub(super) fn fast_rows_avx512<T: Real>(src: Sources<'_, T>, rows: Rows<'_, T>, g: T, eps2: T) {
        fast_rows::<T, true>(src, rows, g, eps2)
    }
}

fn widest_isa() -> Isa {
    #[cfg(all(feature = "simd", target_arch = "x86_64"))]
    {
        if std::is_x86_feature_detected!("avx512f")
            && std::is_x86_feature_detected!("avx512vl")
            && std::is_x86_feature_detected!("fma")
        {
            return Isa::Avx512;
        }
        if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
            return Isa::Avx2;
        }
    }
    Isa::Baseline
}

/// The SIMD rung exists when the crate is built with the `simd` feature and
/// the host offers more than the target's baseline vector ISA.
pub(crate) fn simd_available() -> bool {
    if !cfg!(feature = "simd") {
        return false;
    }
    if cfg!(target_arch = "x86_64") {
        widest_isa() != Isa::Baseline
    } else {
        cfg!(target_arch = "aarch64")
    }
}

/// Short tag naming the widest vector ISA the host reports.
pub fn simd_capability() -> &'static str {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx512f") {
            return "avx512f";
        }
        if std::is_x86_feature_detected!("avx2") {
            return "avx2";
        }
        if std::is_x86_feature_detected!("avx") {
            return "avx";
        }
        "sse2"
    }
    #[cfg(target_arch = "aarch64")]
    {
        "neon"
    }
    #[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
    {
        "scalar"
    }
}
