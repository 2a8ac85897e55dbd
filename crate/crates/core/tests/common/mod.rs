//! Reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;

/// Real-space Hamiltonian on a ring of `l` sites.
pub fn hamiltonian(g: f64, phi: f64, l: usize) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(l, l);
    let nnn = Complex64::from_polar(g, phi);
    for n in 0..l {
        // (H psi)(n) = psi(n +- 1) + g e^{i phi} psi(n + 2) + g e^{-i phi} psi(n - 2)
        h[(n, (n + 1) % l)] += Complex64::new(1.0, 0.0);
        h[(n, (n + l - 1) % l)] += Complex64::new(1.0, 0.0);
        h[(n, (n + 2) % l)] += nnn;
        h[(n, (n + l - 2) % l)] += nnn.conj();
    }
    h
}

/// `exp(a)` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * a.nrows() as f64;
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let b = a / Complex64::from(2f64.powi(squarings));
    let n = a.nrows();
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &b / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn seeded_rng() -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(0x5eed)
}

/// Double-double arithmetic, enough for the Airy power series whose terms
/// grow to ~1e9 before cancelling.
#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

impl Dd {
    fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }
    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.0, o.0);
        let lo = s.1 + self.1 + o.1;
        Dd::two_sum(s.0, lo)
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        let lo = e + self.0 * o.1 + self.1 * o.0;
        Dd::two_sum(p, lo)
    }
    fn div_f64(self, d: f64) -> Dd {
        let q = self.0 / d;
        // remainder self - q d, exactly
        let p = q * d;
        let e = q.mul_add(d, -p);
        let r = (self.0 - p - e + self.1) / d;
        Dd::two_sum(q, r)
    }
    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// Ai(x) from its Maclaurin series `c1 f(x) - c2 g(x)`.
pub fn airy_series(x: f64) -> f64 {
    const AI0: f64 = 0.355_028_053_887_817_2;
    const AIP0: f64 = 0.258_819_403_792_806_8;
    let x3 = Dd::from(x).mul(Dd::from(x)).mul(Dd::from(x));
    let (mut f, mut tf) = (Dd::from(1.0), Dd::from(1.0));
    let (mut g, mut tg) = (Dd::from(x), Dd::from(x));
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        // f: x^{3k} / ((2*3)(5*6)...((3k-1)3k)); g: x^{3k+1} / ((3*4)(6*7)...(3k(3k+1)))
        tf = tf.mul(x3).div_f64((k3 - 1.0) * k3);
        tg = tg.mul(x3).div_f64(k3 * (k3 + 1.0));
        f = f.add(tf);
        g = g.add(tg);
        if tf.0.abs() < 1e-40 && tg.0.abs() < 1e-40 {
            break;
        }
    }
    f.mul(Dd::from(AI0)).add(g.mul(Dd::from(-AIP0))).value()
}

