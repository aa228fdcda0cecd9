//! 128-bit adaptive Gauss-Legendre quadrature of `∫_0^1 g(u) e^{-iπku} du`
//! for `k = 0..=K` at once, where `g` is a spline piece. All frequencies
//! share the same nodes, so every node costs one `sin`, one `cos` and one
//! `exp` per rate.

use astro_float::{BigFloat, Consts, RoundingMode};
use ebsampling::expoly::ExpPoly;

const P: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;
const MAX_DEPTH: usize = 12;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().expect("finite value")
}

#[derive(Clone)]
struct Cplx(BigFloat, BigFloat);

impl Cplx {
    fn zero() -> Self {
        Cplx(big(0.0), big(0.0))
    }
    fn add(&self, o: &Cplx) -> Cplx {
        Cplx(self.0.add(&o.0, P, RM), self.1.add(&o.1, P, RM))
    }
    fn sub(&self, o: &Cplx) -> Cplx {
        Cplx(self.0.sub(&o.0, P, RM), self.1.sub(&o.1, P, RM))
    }
    fn mul(&self, o: &Cplx) -> Cplx {
        let re = self.0.mul(&o.0, P, RM).sub(&self.1.mul(&o.1, P, RM), P, RM);
        let im = self.0.mul(&o.1, P, RM).add(&self.1.mul(&o.0, P, RM), P, RM);
        Cplx(re, im)
    }
    fn scale(&self, s: &BigFloat) -> Cplx {
        Cplx(self.0.mul(s, P, RM), self.1.mul(s, P, RM))
    }
    fn norm_f64(&self) -> f64 {
        to_f64(&self.0).hypot(to_f64(&self.1))
    }
}

/// Nodes and weights on `[-1, 1]`.
struct Rule {
    nodes: Vec<BigFloat>,
    weights: Vec<BigFloat>,
}

fn legendre_rule(n: usize) -> Rule {
    let one = big(1.0);
    let two = big(2.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = big(guess);
        let mut dp = big(0.0);
        for _ in 0..8 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = big(1.0);
            let mut p1 = x.clone();
            for k in 2..=n {
                let kf = big(k as f64);
                let a = big((2 * k - 1) as f64).mul(&x, P, RM).mul(&p1, P, RM);
                let b = big((k - 1) as f64).mul(&p0, P, RM);
                let p2 = a.sub(&b, P, RM).div(&kf, P, RM);
                p0 = p1;
                p1 = p2;
            }
            let denom = x.mul(&x, P, RM).sub(&one, P, RM);
            dp = big(n as f64)
                .mul(&x.mul(&p1, P, RM).sub(&p0, P, RM), P, RM)
                .div(&denom, P, RM);
            x = x.sub(&p1.div(&dp, P, RM), P, RM);
        }
        let w = two.div(
            &one.sub(&x.mul(&x, P, RM), P, RM).mul(&dp.mul(&dp, P, RM), P, RM),
            P,
            RM,
        );
        nodes.push(x);
        weights.push(w);
    }
    Rule { nodes, weights }
}

pub struct FourierOracle {
    consts: Consts,
    pi: BigFloat,
    coarse: Rule,
    fine: Rule,
    harmonics: usize,
}

impl FourierOracle {
    /// Computes `∫_0^1 g(u) e^{-iπku} du` for `k = 0..=harmonics`.
    pub fn new(harmonics: usize) -> Self {
        let mut consts = Consts::new().expect("constants cache");
        let pi = consts.pi(P, RM);
        FourierOracle {
            consts,
            pi,
            coarse: legendre_rule(20),
            fine: legendre_rule(40),
            harmonics,
        }
    }

    fn integrand(&mut self, piece: &ExpPoly, u: &BigFloat) -> Vec<Cplx> {
        let mut g = big(0.0);
        for term in piece.terms() {
            let mut poly = big(0.0);
            for &c in term.coeffs.iter().rev() {
                poly = poly.mul(u, P, RM).add(&big(c), P, RM);
            }
            let e = big(term.rate).mul(u, P, RM).exp(P, RM, &mut self.consts);
            g = g.add(&poly.mul(&e, P, RM), P, RM);
        }
        let arg = self.pi.mul(u, P, RM);
        let c = arg.cos(P, RM, &mut self.consts);
        let s = arg.sin(P, RM, &mut self.consts).neg();
        let step = Cplx(c, s);
        let mut phase = Cplx(big(1.0), big(0.0));
        let mut out = Vec::with_capacity(self.harmonics + 1);
        for _ in 0..=self.harmonics {
            out.push(phase.scale(&g));
            phase = phase.mul(&step);
        }
        out
    }

    fn apply(&mut self, piece: &ExpPoly, a: &BigFloat, b: &BigFloat, fine: bool) -> Vec<Cplx> {
        let half = b.sub(a, P, RM).div(&big(2.0), P, RM);
        let mid = a.add(b, P, RM).div(&big(2.0), P, RM);
        let (nodes, weights) = {
            let rule = if fine { &self.fine } else { &self.coarse };
            (rule.nodes.clone(), rule.weights.clone())
        };
        let mut acc = vec![Cplx::zero(); self.harmonics + 1];
        for (x, w) in nodes.iter().zip(&weights) {
            let u = mid.add(&half.mul(x, P, RM), P, RM);
            let wh = w.mul(&half, P, RM);
            for (slot, v) in acc.iter_mut().zip(self.integrand(piece, &u)) {
                *slot = slot.add(&v.scale(&wh));
            }
        }
        acc
    }

    fn segment(
        &mut self,
        piece: &ExpPoly,
        a: BigFloat,
        b: BigFloat,
        tol: f64,
        depth: usize,
    ) -> Vec<Cplx> {
        let c = self.apply(piece, &a, &b, false);
        let r = self.apply(piece, &a, &b, true);
        let err = c
            .iter()
            .zip(&r)
            .map(|(x, y)| x.sub(y).norm_f64())
            .fold(0.0, f64::max);
        if err <= tol || depth >= MAX_DEPTH {
            return r;
        }
        let m = a.add(&b, P, RM).div(&big(2.0), P, RM);
        let left = self.segment(piece, a, m.clone(), 0.5 * tol, depth + 1);
        let right = self.segment(piece, m, b, 0.5 * tol, depth + 1);
        left.iter().zip(&right).map(|(x, y)| x.add(y)).collect()
    }

    /// `∫_0^1 g(u) e^{-iπku} du` for every `k`, with absolute tolerance
    /// `tol`, rounded to `f64` only at the end.
    pub fn piece_transform(&mut self, piece: &ExpPoly, tol: f64) -> Vec<BigComplex> {
        self.segment(piece, big(0.0), big(1.0), tol, 0)
            .into_iter()
            .map(BigComplex)
            .collect()
    }
}

/// A 128-bit complex value; sums stay exact until [`BigComplex::to_f64`].
#[derive(Clone)]
pub struct BigComplex(Cplx);

impl BigComplex {
    pub fn zero() -> Self {
        BigComplex(Cplx::zero())
    }

    pub fn add_signed(&self, other: &BigComplex, negate: bool) -> BigComplex {
        if negate {
            BigComplex(self.0.sub(&other.0))
        } else {
            BigComplex(self.0.add(&other.0))
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.0 .0), to_f64(&self.0 .1))
    }
}
