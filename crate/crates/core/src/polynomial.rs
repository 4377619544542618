//! Sparse multivariate polynomials with exact derivatives, used as test fields.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// `Σ c·x^e` from `(exponents, coefficient)` pairs.
    pub fn from_terms(vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars, "exponent length must match the variable count");
            p.add_term(e, c);
        }
        p
    }

    /// `|x|^{2k}`.
    pub fn radial_power(vars: usize, k: u32) -> Self {
        let mut p = Self::constant(vars, 1.0);
        let mut r2 = Self::zero(vars);
        for i in 0..vars {
            let mut e = vec![0; vars];
            e[i] = 2;
            r2.add_term(e, 1.0);
        }
        for _ in 0..k {
            p = p.mul(&r2);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut d = Self::zero(self.vars);
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                d.add_term(f, c * e[i] as f64);
            }
        }
        d
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.vars).map(|i| self.derivative(i)).collect()
    }

    pub fn laplacian(&self) -> Self {
        (0..self.vars).fold(Self::zero(self.vars), |acc, i| acc.add(&self.derivative(i).derivative(i)))
    }

    pub fn laplacian_power(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.laplacian())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (e, &c) in &other.terms {
            s.add_term(e.clone(), c);
        }
        s
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut s = Self::zero(self.vars);
        for (e, &c) in &self.terms {
            s.add_term(e.clone(), a * c);
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.vars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                s.add_term(e, c1 * c2);
            }
        }
        s
    }

    /// `(x_i - shift)·p`.
    pub fn mul_shifted_coordinate(&self, i: usize, shift: f64) -> Self {
        let mut s = Self::zero(self.vars);
        for (e, &c) in &self.terms {
            let mut f = e.clone();
            f[i] += 1;
            s.add_term(f, c);
            s.add_term(e.clone(), -shift * c);
        }
        s
    }

    /// `(x - y)·∇p`.
    pub fn directional_dilation(&self, y: &[f64]) -> Self {
        (0..self.vars).fold(Self::zero(self.vars), |acc, i| {
            acc.add(&self.derivative(i).mul_shifted_coordinate(i, y[i]))
        })
    }

    /// `Δ^{j/2} p` as a list of components: one scalar for even `j`, the gradient
    /// of `Δ^{(j-1)/2} p` for odd `j`.
    pub fn half_power(&self, j: usize) -> Vec<Self> {
        let base = self.laplacian_power(j / 2);
        if j % 2 == 0 {
            vec![base]
        } else {
            base.gradient()
        }
    }
}
