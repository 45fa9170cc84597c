use std::fmt::Debug;

use nalgebra::DMatrix;

use crate::C64;

/// A finite family of holomorphic functions on `C^n`.
pub trait Basis: Debug + Send + Sync {
    fn n(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Short identifier stored alongside Gram matrices.
    fn id(&self) -> String;

    /// Write `e_i(z)` into `out[i]`.
    fn eval_into(&self, z: &[C64], out: &mut [C64]);

    /// Write `d^alpha e_i(z)` into `out[i]`.
    fn derivative_into(&self, z: &[C64], alpha: &[u32], out: &mut [C64]);

    fn eval(&self, z: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        self.eval_into(z, &mut out);
        out
    }

    fn derivative(&self, z: &[C64], alpha: &[u32]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        self.derivative_into(z, alpha, &mut out);
        out
    }
}

/// Monomials `prod_j ((z_j - c_j) / s_j)^{a_j}` of total degree at most
/// `d_max`, graded by degree and in descending lexicographic order within a
/// degree (`1, z1, z2, z1^2, z1 z2, z2^2, ...`).
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    d_max: u32,
    multi_indices: Vec<Vec<u32>>,
    center: Vec<C64>,
    scale: Vec<f64>,
}

/// Monomials of total degree at most `d_max` in `n` variables.
pub fn monomial_basis(n: usize, d_max: u32) -> MonomialBasis {
    assert!(n >= 1, "monomial basis needs n >= 1");
    let mut multi_indices = Vec::new();
    let mut current = vec![0u32; n];
    for d in 0..=d_max {
        push_degree(&mut multi_indices, &mut current, 0, d);
    }
    MonomialBasis {
        n,
        d_max,
        multi_indices,
        center: vec![C64::new(0.0, 0.0); n],
        scale: vec![1.0; n],
    }
}

fn push_degree(out: &mut Vec<Vec<u32>>, current: &mut [u32], j: usize, left: u32) {
    if j + 1 == current.len() {
        current[j] = left;
        out.push(current.to_vec());
        return;
    }
    for a in (0..=left).rev() {
        current[j] = a;
        push_degree(out, current, j + 1, left - a);
    }
}

impl MonomialBasis {
    /// The zero-dimensional span.
    pub fn empty(n: usize) -> Self {
        MonomialBasis {
            n,
            d_max: 0,
            multi_indices: Vec::new(),
            center: vec![C64::new(0.0, 0.0); n],
            scale: vec![1.0; n],
        }
    }

    /// Recenter and rescale each coordinate.
    pub fn with_affine(mut self, center: Vec<C64>, scale: Vec<f64>) -> Self {
        assert_eq!(center.len(), self.n);
        assert_eq!(scale.len(), self.n);
        assert!(
            scale.iter().all(|s| *s > 0.0 && s.is_finite()),
            "scales must be positive"
        );
        self.center = center;
        self.scale = scale;
        self
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn multi_indices(&self) -> &[Vec<u32>] {
        &self.multi_indices
    }

    fn powers(&self, z: &[C64]) -> Vec<Vec<C64>> {
        (0..self.n)
            .map(|j| {
                let u = (z[j] - self.center[j]) / self.scale[j];
                let mut p = Vec::with_capacity(self.d_max as usize + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=self.d_max {
                    p.push(acc);
                    acc *= u;
                }
                p
            })
            .collect()
    }
}

impl Basis for MonomialBasis {
    fn n(&self) -> usize {
        self.n
    }

    fn len(&self) -> usize {
        self.multi_indices.len()
    }

    fn id(&self) -> String {
        format!("monomial(n={}, d_max={})", self.n, self.d_max)
    }

    fn eval_into(&self, z: &[C64], out: &mut [C64]) {
        let p = self.powers(z);
        for (o, a) in out.iter_mut().zip(&self.multi_indices) {
            *o = a
                .iter()
                .enumerate()
                .map(|(j, &k)| p[j][k as usize])
                .product();
        }
    }

    fn derivative_into(&self, z: &[C64], alpha: &[u32], out: &mut [C64]) {
        assert_eq!(alpha.len(), self.n);
        let p = self.powers(z);
        for (o, a) in out.iter_mut().zip(&self.multi_indices) {
            let mut v = C64::new(1.0, 0.0);
            for j in 0..self.n {
                if a[j] < alpha[j] {
                    v = C64::new(0.0, 0.0);
                    break;
                }
                let falling: f64 = (a[j] - alpha[j] + 1..=a[j]).map(f64::from).product();
                v *= p[j][(a[j] - alpha[j]) as usize] * falling
                    / self.scale[j].powi(alpha[j] as i32);
            }
            *o = v;
        }
    }
}

/// `e'_i = sum_j U_ij e_j` for an invertible mixing matrix `U`.
#[derive(Debug, Clone)]
pub struct MixedBasis<B> {
    base: B,
    mix: DMatrix<C64>,
}

impl<B: Basis> MixedBasis<B> {
    pub fn new(base: B, mix: DMatrix<C64>) -> Self {
        assert_eq!(mix.nrows(), base.len());
        assert_eq!(mix.ncols(), base.len());
        Self { base, mix }
    }

    fn apply(&self, raw: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..raw.len()).map(|j| self.mix[(i, j)] * raw[j]).sum();
        }
    }
}

impl<B: Basis> Basis for MixedBasis<B> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn len(&self) -> usize {
        self.base.len()
    }

    fn id(&self) -> String {
        format!("mixed({})", self.base.id())
    }

    fn eval_into(&self, z: &[C64], out: &mut [C64]) {
        self.apply(&self.base.eval(z), out);
    }

    fn derivative_into(&self, z: &[C64], alpha: &[u32], out: &mut [C64]) {
        self.apply(&self.base.derivative(z, alpha), out);
    }
}
