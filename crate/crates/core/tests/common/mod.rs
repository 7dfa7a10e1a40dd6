//! Exact trigonometric-polynomial algebra used as an independent oracle.
//!
//! A field is a sparse map from integer wavevector to complex coefficients;
//! derivatives multiply by `ik` and products are discrete convolutions, so
//! nothing here touches an FFT, a grid or a dealiasing mask.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hall_mhd::{DimMode, Grid, SpectralScalarField, SpectralVectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

pub type K = [i32; 3];

#[derive(Clone, Debug, Default)]
pub struct Scalar(pub BTreeMap<K, Complex64>);

#[derive(Clone, Debug, Default)]
pub struct Vector(pub [Scalar; 3]);

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

impl Scalar {
    pub fn add_term(&mut self, k: K, c: Complex64) {
        *self.0.entry(k).or_default() += c;
    }

    pub fn partial(&self, axis: usize) -> Scalar {
        Scalar(self.0.iter().map(|(k, c)| (*k, c * i() * k[axis] as f64)).collect())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let mut out = Scalar::default();
        for (ka, a) in &self.0 {
            for (kb, b) in &other.0 {
                out.add_term([ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]], a * b);
            }
        }
        out
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add_term(*k, *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Scalar {
        Scalar(self.0.iter().map(|(k, c)| (*k, c * s)).collect())
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.scale(-1.0))
    }

    pub fn retain(&self, keep: impl Fn(K) -> bool) -> Scalar {
        Scalar(self.0.iter().filter(|(k, _)| keep(**k)).map(|(k, c)| (*k, *c)).collect())
    }

    /// `(2π)^d Σ |c|²`
    pub fn l2_squared(&self, d: usize) -> f64 {
        (2.0 * std::f64::consts::PI).powi(d as i32) * self.0.values().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn from_field(f: &SpectralScalarField) -> Scalar {
        let g = f.grid();
        let mut out = Scalar::default();
        for (idx, c) in f.coefficients().iter().enumerate() {
            if *c != Complex64::default() {
                out.add_term(g.wavevector(idx), *c);
            }
        }
        out
    }

    /// Largest coefficient difference against a grid field; terms the grid
    /// cannot represent count in full.
    pub fn max_diff(&self, f: &SpectralScalarField) -> f64 {
        let other = Scalar::from_field(f);
        let mut worst = 0.0f64;
        for (k, c) in &self.0 {
            worst = worst.max((c - other.0.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, c) in &other.0 {
            if !self.0.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Vector {
    pub fn from_field(f: &SpectralVectorField) -> Vector {
        let g = f.grid();
        let mut out = Vector::default();
        for idx in 0..g.len() {
            let c = f.coefficient(idx);
            for a in 0..3 {
                if c[a] != Complex64::default() {
                    out.0[a].add_term(g.wavevector(idx), c[a]);
                }
            }
        }
        out
    }

    pub fn to_field(&self, g: &Grid) -> SpectralVectorField {
        let mut comps: [Vec<Complex64>; 3] = Default::default();
        for (a, comp) in comps.iter_mut().enumerate() {
            *comp = vec![Complex64::default(); g.len()];
            for (k, c) in &self.0[a].0 {
                let idx = g.index_of(*k).expect("wavevector on grid");
                comp[idx] += c;
            }
        }
        SpectralVectorField::from_coefficients(g, comps).unwrap()
    }

    pub fn component(&self, a: usize) -> &Scalar {
        &self.0[a]
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Vector {
        Vector([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }

    pub fn add(&self, o: &Vector) -> Vector {
        Vector([0, 1, 2].map(|a| self.0[a].add(&o.0[a])))
    }

    pub fn sub(&self, o: &Vector) -> Vector {
        Vector([0, 1, 2].map(|a| self.0[a].sub(&o.0[a])))
    }

    pub fn scale(&self, s: f64) -> Vector {
        self.map(|c| c.scale(s))
    }

    pub fn partial(&self, axis: usize) -> Vector {
        self.map(|c| c.partial(axis))
    }

    pub fn curl(&self) -> Vector {
        let d = |a: usize, ax: usize| self.0[a].partial(ax);
        Vector([d(2, 1).sub(&d(1, 2)), d(0, 2).sub(&d(2, 0)), d(1, 0).sub(&d(0, 1))])
    }

    pub fn divergence(&self) -> Scalar {
        self.0[0].partial(0).add(&self.0[1].partial(1)).add(&self.0[2].partial(2))
    }

    /// `(u·∇)f`
    pub fn advect(u: &Vector, f: &Vector) -> Vector {
        Vector([0, 1, 2].map(|j| {
            (0..3).fold(Scalar::default(), |acc, i| acc.add(&u.0[i].mul(&f.0[j].partial(i))))
        }))
    }

    pub fn cross(a: &Vector, b: &Vector) -> Vector {
        let m = |x: usize, y: usize| a.0[x].mul(&b.0[y]);
        Vector([m(1, 2).sub(&m(2, 1)), m(2, 0).sub(&m(0, 2)), m(0, 1).sub(&m(1, 0))])
    }

    pub fn dot(a: &Vector, b: &Vector) -> Scalar {
        (0..3).fold(Scalar::default(), |acc, x| acc.add(&a.0[x].mul(&b.0[x])))
    }

    pub fn retain(&self, keep: impl Fn(K) -> bool + Copy) -> Vector {
        self.map(|c| c.retain(keep))
    }

    /// Leray projection `f − k(k·f)/|k|²`, zero mode kept.
    pub fn leray(&self) -> Vector {
        let mut keys: Vec<K> = Vec::new();
        for c in &self.0 {
            keys.extend(c.0.keys().copied());
        }
        keys.sort();
        keys.dedup();
        let mut out = Vector::default();
        for k in keys {
            let v = [0, 1, 2].map(|a| self.0[a].0.get(&k).copied().unwrap_or_default());
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            let kd = v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64;
            for a in 0..3 {
                let c = if k2 == 0.0 { v[a] } else { v[a] - kd * k[a] as f64 / k2 };
                out.0[a].add_term(k, c);
            }
        }
        out
    }

    pub fn max_diff(&self, f: &SpectralVectorField) -> f64 {
        (0..3)
            .map(|a| {
                let g = SpectralScalarField::from_coefficients(f.grid(), f.component(a).to_vec()).unwrap();
                self.0[a].max_diff(&g)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(Scalar::max_abs).fold(0.0, f64::max)
    }

    pub fn l2_squared(&self, d: usize) -> f64 {
        self.0.iter().map(|c| c.l2_squared(d)).sum()
    }
}

/// `|k_i| <= N/3` on every axis.
pub fn dealias_set(n: usize) -> impl Fn(K) -> bool + Copy {
    let m = (n / 3) as i32;
    move |k: K| k.iter().all(|x| x.abs() <= m)
}

/// A real, solenoidal field with `terms` random modes inside
/// `|k_i| <= kmax`, built in the oracle algebra.
pub fn random_solenoidal(rng: &mut ChaCha8Rng, dim: DimMode, kmax: i32, terms: usize, amp: f64) -> Vector {
    let mut v = Vector::default();
    for _ in 0..terms {
        let mut k = [0i32; 3];
        for a in 0..dim.spatial_dims() {
            k[a] = rng.random_range(-kmax..=kmax);
        }
        if k == [0, 0, 0] {
            continue;
        }
        let neg = [-k[0], -k[1], -k[2]];
        for a in 0..3 {
            let c = Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp));
            v.0[a].add_term(k, c);
            v.0[a].add_term(neg, c.conj());
        }
    }
    v.leray()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(dim: DimMode, n: usize) -> Grid {
    Grid::new(dim, n).unwrap()
}

/// Random dealias-safe solenoidal field directly on a grid.
pub fn random_field(g: &Grid, seed: u64, terms: usize) -> SpectralVectorField {
    let mut r = rng(seed);
    let kmax = (g.points_per_axis() / 3) as i32;
    random_solenoidal(&mut r, g.dim_mode(), kmax, terms, 1.0).to_field(g)
}
