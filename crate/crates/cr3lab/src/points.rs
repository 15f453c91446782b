//! Sample points on `S³` and the flows of the reference frame fields.

use crate::{Scalar, C};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A point `(z, w)` with `|z|² + |w|² = 1`.
#[derive(Clone, Copy, Debug)]
pub struct SPoint {
    pub z: C,
    pub w: C,
}

impl SPoint {
    pub fn new_normalized(z: C, w: C) -> Self {
        let n = (z.norm_sqr() + w.norm_sqr()).sqrt();
        SPoint { z: z / n, w: w / n }
    }
}

/// Uniformly distributed points (normalized 4-dimensional Gaussians).
pub fn random_points(seed: u64, count: usize) -> Vec<SPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        // Box-Muller; two independent normals per call pair
        let u1: Scalar = rng.gen_range(1e-12..1.0);
        let u2: Scalar = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        (
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        )
    };
    (0..count)
        .map(|_| {
            let (x1, x2) = gauss();
            let (x3, x4) = gauss();
            SPoint::new_normalized(C::new(x1, x2), C::new(x3, x4))
        })
        .collect()
}

/// Flow of the Reeb field `T`: `(z, w) ↦ (e^{it} z, e^{it} w)`.
pub fn flow_t(p: SPoint, t: Scalar) -> SPoint {
    let e = C::new(0.0, t).exp();
    SPoint {
        z: e * p.z,
        w: e * p.w,
    }
}

/// Flow of `X = Z₁ + Z₁̄`: rotation in the `(z, w̄)` real plane,
/// `z(t) = z cos t + w̄ sin t`, `w(t) = w cos t − z̄ sin t`.
pub fn flow_x(p: SPoint, t: Scalar) -> SPoint {
    let (ct, st) = (t.cos(), t.sin());
    SPoint {
        z: p.z * ct + p.w.conj() * st,
        w: p.w * ct - p.z.conj() * st,
    }
}

/// Flow of `Y = i(Z₁ − Z₁̄)`: `z(t) = z cos t + i w̄ sin t`,
/// `w(t) = w cos t − i z̄ sin t`.
pub fn flow_y(p: SPoint, t: Scalar) -> SPoint {
    let (ct, st) = (t.cos(), t.sin());
    let i = C::new(0.0, 1.0);
    SPoint {
        z: p.z * ct + i * p.w.conj() * st,
        w: p.w * ct - i * p.z.conj() * st,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flows_stay_on_sphere() {
        for (k, p) in random_points(7, 10).into_iter().enumerate() {
            let t = 0.1 + 0.05 * k as Scalar;
            for q in [flow_t(p, t), flow_x(p, t), flow_y(p, t)] {
                assert!((q.z.norm_sqr() + q.w.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }
}
