//! The multiparametric orthogonal braid matrix, its metric and projectors.

use serde::Serialize;
use thiserror::Error;

use crate::report::VerificationReport;
use crate::scalar::{ParameterContext, Point, Scalar, ScalarError};
use crate::tensor::{Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RMatrixError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("no convention satisfies the identity suite for N = {0}")]
    NoConvention(usize),
}

/// The discrete choices left open by the standard construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Convention {
    /// C_{ab} = r^{sigma rho_a} delta_{b a'}.
    pub sigma: i8,
    /// λ sits at R^{ij}_{ji} for i > j when true, i < j otherwise.
    pub lambda_descending: bool,
    /// Sign of the exponent in r^{±(rho_i - rho_j)}.
    pub exp_sign: i8,
}

impl Convention {
    pub fn all() -> Vec<Convention> {
        let mut v = Vec::new();
        for sigma in [-1, 1] {
            for lambda_descending in [true, false] {
                for exp_sign in [1, -1] {
                    v.push(Convention { sigma, lambda_descending, exp_sign });
                }
            }
        }
        v
    }
    /// Index-reversal image a -> a'.
    pub fn mirror(&self) -> Convention {
        Convention { sigma: -self.sigma, lambda_descending: !self.lambda_descending, exp_sign: -self.exp_sign }
    }
}

/// 2 rho_a for 0-based `a`.
pub fn rho2(n: usize, a: usize) -> i32 {
    let a1 = a as i32 + 1;
    let ap = n as i32 + 1 - a1;
    let n = n as i32;
    match a1.cmp(&ap) {
        std::cmp::Ordering::Less => n - 2 * a1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => n + 2 - 2 * a1,
    }
}

#[derive(Clone, Debug)]
pub struct RMatrixBundle {
    pub ctx: ParameterContext,
    pub conv: Convention,
    /// Twice the weight vector.
    pub rho2: Vec<i32>,
    /// The deformation parameter r (a constant after numeric specialisation).
    pub r: Scalar,
    /// C_{ab}, two lower legs.
    pub c_low: Tensor,
    /// C^{ab}, two upper legs.
    pub c_up: Tensor,
    /// D^a_b = C^{ac} C_{bc}.
    pub d: Tensor,
    pub dvec: Vec<Scalar>,
    pub rhat: Tensor,
    pub rhat_inv: Tensor,
    pub k: Tensor,
    pub p0: Tensor,
    pub ps: Tensor,
    pub pa: Tensor,
    pub qn: Scalar,
}

fn rp(r: &Scalar, k: i32) -> Scalar {
    r.pow(k).expect("r is invertible")
}

/// Q_N = (1 - r^{-2}) / ((1 - r^{-N})(1 + r^{N-2})).
pub fn q_n(r: &Scalar, n: usize) -> Scalar {
    let one = Scalar::one();
    let n = n as i32;
    let num = one.sub(&rp(r, -2));
    let den = one.sub(&rp(r, -n)).mul(&one.add(&rp(r, n - 2)));
    num.div(&den).expect("Q_N denominator is a nonzero function")
}

/// (C_{ab}, C^{ab}, D, d, rho2) for the given sign convention.
pub fn build_metric(ctx: &ParameterContext, sigma: i8) -> Result<(Tensor, Tensor, Tensor, Vec<Scalar>, Vec<i32>), RMatrixError> {
    let n = ctx.n;
    if n < 3 {
        return Err(ScalarError::Domain(format!("N = {} < 3", n)).into());
    }
    let rho: Vec<i32> = (0..n).map(|a| rho2(n, a)).collect();
    let mut c_low = Tensor::mixed(n, 0, 2);
    let mut c_up = Tensor::mixed(n, 2, 0);
    for a in 0..n {
        let v = Scalar::r_half(sigma as i32 * rho[a]);
        c_low.set(&[a, n - 1 - a], v.clone());
        c_up.set(&[a, n - 1 - a], v);
    }
    let mut d = Tensor::mixed(n, 1, 1);
    let mut dvec = Vec::with_capacity(n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Scalar::zero();
            for c in 0..n {
                acc = acc.add(&c_up.get(&[a, c]).mul(c_low.get(&[b, c])));
            }
            if a == b {
                dvec.push(acc.clone());
            }
            d.set(&[a, b], acc);
        }
    }
    Ok((c_low, c_up, d, dvec, rho))
}

/// R̂^{ab}_{cd} = R^{ba}_{cd} for the given convention.
pub fn build_rhat(ctx: &ParameterContext, conv: Convention) -> Result<Tensor, RMatrixError> {
    let n = ctx.n;
    let rho: Vec<i32> = (0..n).map(|a| rho2(n, a)).collect();
    let pr = |a: usize| n - 1 - a;
    let beyond = |i: usize, j: usize| if conv.lambda_descending { i > j } else { i < j };
    let lam = Scalar::lambda();
    let mut r_t = Tensor::mixed(n, 2, 2);
    for a in 0..n {
        for b in 0..n {
            let diag = if a == b {
                if a != pr(a) { Scalar::r(1) } else { Scalar::one() }
            } else if b == pr(a) {
                Scalar::r(-1)
            } else {
                Scalar::r(1).div(&ctx.q(a + 1, b + 1)?)?
            };
            r_t.set(&[a, b, a, b], diag);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !beyond(i, j) {
                continue;
            }
            let v = r_t.get(&[i, j, j, i]).add(&lam);
            r_t.set(&[i, j, j, i], v);
            let e = conv.exp_sign as i32 * (rho[i] - rho[j]);
            let idx = [i, pr(i), j, pr(j)];
            let v = r_t.get(&idx).sub(&lam.mul(&Scalar::r_half(e)));
            r_t.set(&idx, v);
        }
    }
    let mut rhat = Tensor::mixed(n, 2, 2);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = r_t.get(&[b, a, c, d]);
                    if !v.is_zero() {
                        rhat.set(&[a, b, c, d], v.clone());
                    }
                }
            }
        }
    }
    Ok(rhat)
}

impl RMatrixBundle {
    /// Build every tensor for one convention, without verification.
    pub fn with_convention(ctx: &ParameterContext, conv: Convention) -> Result<Self, RMatrixError> {
        let n = ctx.n;
        let (c_low, c_up, d, dvec, rho2) = build_metric(ctx, conv.sigma)?;
        let rhat = build_rhat(ctx, conv)?;
        let r = Scalar::r(1);
        let mut b = RMatrixBundle {
            ctx: ctx.clone(),
            conv,
            rho2,
            r,
            c_low,
            c_up,
            d,
            dvec,
            rhat,
            rhat_inv: Tensor::mixed(n, 2, 2),
            k: Tensor::mixed(n, 2, 2),
            p0: Tensor::mixed(n, 2, 2),
            ps: Tensor::mixed(n, 2, 2),
            pa: Tensor::mixed(n, 2, 2),
            qn: q_n(&Scalar::r(1), n),
        };
        b.build_projectors()?;
        Ok(b)
    }

    /// Search all conventions and keep the ones passing the identity suite.
    ///
    /// When a mirror pair survives, the member with sigma = -1 is kept; the
    /// Minkowski reproduction depends on that orientation of the metric.
    pub fn build(ctx: &ParameterContext) -> Result<Self, RMatrixError> {
        let survivors = Self::search(ctx)?;
        survivors
            .into_iter()
            .min_by_key(|b| (b.conv.sigma, !b.conv.lambda_descending, b.conv.exp_sign))
            .ok_or(RMatrixError::NoConvention(ctx.n))
    }

    /// All conventions passing a numeric screen and then the exact suite.
    pub fn search(ctx: &ParameterContext) -> Result<Vec<Self>, RMatrixError> {
        let pt = sample_points(ctx, 1).remove(0);
        let mut out = Vec::new();
        for conv in Convention::all() {
            let b = Self::with_convention(ctx, conv)?;
            let numeric = b.eval(&pt)?;
            if !numeric.verify_core().all_passed() {
                continue;
            }
            if b.verify_core().all_passed() {
                out.push(b);
            }
        }
        Ok(out)
    }

    fn build_projectors(&mut self) -> Result<(), RMatrixError> {
        let n = self.ctx.n;
        let ni = n as i32;
        let r = &self.r;
        let mut k = Tensor::mixed(n, 2, 2);
        for a in 0..n {
            for b in 0..n {
                let cu = self.c_up.get(&[a, b]);
                if cu.is_zero() {
                    continue;
                }
                for c in 0..n {
                    for d in 0..n {
                        let cl = self.c_low.get(&[c, d]);
                        if !cl.is_zero() {
                            k.set(&[a, b, c, d], cu.mul(cl));
                        }
                    }
                }
            }
        }
        let id = Tensor::identity(n, 2);
        let lam = r.sub(&rp(r, -1));
        let mu_inv = r.add(&rp(r, -1)).inv()?;
        let p0 = k.scale(&self.qn);
        let ps = Tensor::combine(&[
            (mu_inv.clone(), &self.rhat),
            (rp(r, -1).mul(&mu_inv), &id),
            (rp(r, -1).add(&rp(r, 1 - ni)).mul(&mu_inv).neg(), &p0),
        ])?;
        let pa = Tensor::combine(&[
            (mu_inv.neg(), &self.rhat),
            (r.mul(&mu_inv), &id),
            (r.sub(&rp(r, 1 - ni)).mul(&mu_inv).neg(), &p0),
        ])?;
        let rhat_inv = Tensor::combine(&[(Scalar::one(), &self.rhat), (lam.neg(), &id), (lam, &k)])?;
        self.k = k;
        self.p0 = p0;
        self.ps = ps;
        self.pa = pa;
        self.rhat_inv = rhat_inv;
        Ok(())
    }

    /// Specialise every tensor at a numeric point.
    pub fn eval(&self, pt: &Point) -> Result<Self, RMatrixError> {
        let ev = |t: &Tensor| t.eval(pt);
        let es = |s: &Scalar| pt.eval(s).map(Scalar::from_coeff);
        Ok(RMatrixBundle {
            ctx: self.ctx.clone(),
            conv: self.conv,
            rho2: self.rho2.clone(),
            r: es(&self.r)?,
            c_low: ev(&self.c_low)?,
            c_up: ev(&self.c_up)?,
            d: ev(&self.d)?,
            dvec: self.dvec.iter().map(es).collect::<Result<_, _>>()?,
            rhat: ev(&self.rhat)?,
            rhat_inv: ev(&self.rhat_inv)?,
            k: ev(&self.k)?,
            p0: ev(&self.p0)?,
            ps: ev(&self.ps)?,
            pa: ev(&self.pa)?,
            qn: es(&self.qn)?,
        })
    }

    pub fn n(&self) -> usize {
        self.ctx.n
    }

    /// Residual of (R̂ - r)(R̂ + r^{-1})(R̂ - root).
    pub fn cubic_residual(&self, third_root: &Scalar) -> Result<Tensor, RMatrixError> {
        let n = self.n();
        let id = Tensor::identity(n, 2);
        let r = &self.r;
        let f = |c: Scalar| Tensor::combine(&[(Scalar::one(), &self.rhat), (c, &id)]);
        let a = f(r.neg())?;
        let b = f(rp(r, -1))?;
        let c = f(third_root.neg())?;
        Ok(a.compose(&b)?.compose(&c)?)
    }

    /// The identities that fix the convention (no ranks, no braid).
    fn verify_core(&self) -> VerificationReport {
        let mut rep = VerificationReport::new("appendixB");
        let n = self.n() as i32;
        rep.check("cubic", zero(self.cubic_residual(&rp(&self.r, 1 - n))));
        rep.check("extrarelation", self.check_inverse());
        rep.check("CR", self.check_cr());
        rep.check("crc", self.check_crc(&self.rhat, &self.rhat_inv));
        rep.check("crc-inverse", self.check_crc(&self.rhat_inv, &self.rhat));
        rep
    }

    fn check_inverse(&self) -> Result<(), String> {
        let id = Tensor::identity(self.n(), 2);
        let p = self.rhat.compose(&self.rhat_inv).map_err(|e| e.to_string())?;
        zero(p.sub(&id).map_err(Into::into))?;
        let p = self.rhat_inv.compose(&self.rhat).map_err(|e| e.to_string())?;
        zero(p.sub(&id).map_err(Into::into))
    }

    fn check_cr(&self) -> Result<(), String> {
        let n = self.n();
        let f = rp(&self.r, 1 - n as i32);
        for c in 0..n {
            for d in 0..n {
                let mut lhs = Scalar::zero();
                for a in 0..n {
                    let b = n - 1 - a;
                    lhs = lhs.add(&self.c_low.get(&[a, b]).mul(self.rhat.get(&[a, b, c, d])));
                }
                let rhs = f.mul(self.c_low.get(&[c, d]));
                if !lhs.equals(&rhs) {
                    return Err(format!("C_ab Rhat^ab_{}{} residual {}", c + 1, d + 1, lhs.sub(&rhs)));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let mut lhs = Scalar::zero();
                for c in 0..n {
                    let d = n - 1 - c;
                    lhs = lhs.add(&self.c_up.get(&[c, d]).mul(self.rhat.get(&[a, b, c, d])));
                }
                let rhs = f.mul(self.c_up.get(&[a, b]));
                if !lhs.equals(&rhs) {
                    return Err(format!("C^cd Rhat^{}{}_cd residual {}", a + 1, b + 1, lhs.sub(&rhs)));
                }
            }
        }
        Ok(())
    }

    /// C_{ab} X^{bc}_{de} = Y^{cf}_{ad} C_{fe} and X^{bc}_{de} C^{ea} = C^{bf} Y^{ca}_{fd}.
    fn check_crc(&self, x: &Tensor, y: &Tensor) -> Result<(), String> {
        let n = self.n();
        let p = |a: usize| n - 1 - a;
        for a in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        let lhs = self.c_low.get(&[a, p(a)]).mul(x.get(&[p(a), c, d, e]));
                        let rhs = y.get(&[c, p(e), a, d]).mul(self.c_low.get(&[p(e), e]));
                        if !lhs.equals(&rhs) {
                            return Err(format!("first form at a={} c={} d={} e={}", a + 1, c + 1, d + 1, e + 1));
                        }
                        let (b, aa) = (a, e);
                        let lhs = x.get(&[b, c, d, p(aa)]).mul(self.c_up.get(&[p(aa), aa]));
                        let rhs = self.c_up.get(&[b, p(b)]).mul(y.get(&[c, aa, p(b), d]));
                        if !lhs.equals(&rhs) {
                            return Err(format!("second form at b={} c={} d={} a={}", b + 1, c + 1, d + 1, aa + 1));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// R̂12 R̂23 R̂12 - R̂23 R̂12 R̂23.
    pub fn braid_residual(&self) -> Result<Tensor, RMatrixError> {
        let id = Tensor::identity(self.n(), 1);
        let r12 = self.rhat.kron(&id);
        let r23 = id.kron(&self.rhat);
        let lhs = r12.compose(&r23)?.compose(&r12)?;
        let rhs = r23.compose(&r12)?.compose(&r23)?;
        Ok(lhs.sub(&rhs)?)
    }

    /// The full identity suite.
    pub fn verify(&self, with_ranks: bool) -> VerificationReport {
        let mut rep = self.verify_core();
        let n = self.n();
        let ni = n as i32;
        let r = &self.r;
        let id = Tensor::identity(n, 2);
        let sum = Tensor::combine(&[(Scalar::one(), &self.ps), (Scalar::one(), &self.pa), (Scalar::one(), &self.p0)]);
        rep.check("projector-sum", zero(sum.and_then(|s| s.sub(&id)).map_err(Into::into)));
        let dec = Tensor::combine(&[(r.clone(), &self.ps), (rp(r, -1).neg(), &self.pa), (rp(r, 1 - ni), &self.p0)]);
        rep.check("decomposition", zero(dec.and_then(|t| t.sub(&self.rhat)).map_err(Into::into)));
        let dec = Tensor::combine(&[(rp(r, -1), &self.ps), (r.neg(), &self.pa), (rp(r, ni - 1), &self.p0)]);
        rep.check("inverse-decomposition", zero(dec.and_then(|t| t.sub(&self.rhat_inv)).map_err(Into::into)));
        let projs = [("S", &self.ps), ("A", &self.pa), ("0", &self.p0)];
        let mut ortho = Ok(());
        for (xn, x) in projs {
            for (yn, y) in projs {
                let p = match x.compose(y) {
                    Ok(p) => p,
                    Err(e) => {
                        ortho = Err(e.to_string());
                        break;
                    }
                };
                let target = if xn == yn { (*x).clone() } else { Tensor::mixed(n, 2, 2) };
                if let Err(w) = zero(p.sub(&target).map_err(Into::into)) {
                    ortho = Err(format!("P_{} P_{}: {}", xn, yn, w));
                }
            }
        }
        rep.check("idempotence-orthogonality", ortho);
        let kk = self.k.compose(&self.k).map_err(RMatrixError::from);
        rep.check("K-square", zero(kk.and_then(|t| Ok(t.sub(&self.k.scale(&self.qn.inv()?))?))));
        // P_A in the closed form of the antisymmetrizer
        let mu = r.add(&rp(r, -1));
        let lam = r.sub(&rp(r, -1));
        let pa_closed = Tensor::combine(&[
            (mu.inv().unwrap().neg(), &self.rhat),
            (r.mul(&mu.inv().unwrap()), &id),
            (lam.div(&rp(r, ni - 2).add(&Scalar::one())).unwrap().mul(&mu.inv().unwrap()).neg(), &self.k),
        ]);
        rep.check("PA-closed-form", zero(pa_closed.and_then(|t| t.sub(&self.pa)).map_err(Into::into)));
        let mut tr = Scalar::zero();
        for d in &self.dvec {
            tr = tr.add(d);
        }
        rep.check(
            "trace-D",
            if tr.equals(&self.qn.inv().unwrap()) { Ok(()) } else { Err(format!("sum d = {}", tr)) },
        );
        rep.check("braid", zero(self.braid_residual()));
        if with_ranks {
            let expect = [("rank-PS", &self.ps, n * (n + 1) / 2 - 1), ("rank-PA", &self.pa, n * (n - 1) / 2), ("rank-P0", &self.p0, 1)];
            for (name, t, want) in expect {
                let got = t.rank();
                rep.check(name, if got == want { Ok(()) } else { Err(format!("rank {} expected {}", got, want)) });
                rep.note(format!("rank {}", got));
            }
        }
        rep
    }
}

fn zero(t: Result<Tensor, RMatrixError>) -> Result<(), String> {
    match t {
        Err(e) => Err(e.to_string()),
        Ok(t) => match t.first_nonzero() {
            None => Ok(()),
            Some((idx, v)) => {
                let idx: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                Err(format!("entry ({}) = {}", idx.join(","), v))
            }
        },
    }
}

impl From<TensorError> for String {
    fn from(e: TensorError) -> String {
        e.to_string()
    }
}

/// Exact unit-circle sample points for the independent parameters.
///
/// r is set through its square root (a Pythagorean point) so that half
/// powers evaluate exactly; twist parameters get rational multiples of r.
pub fn sample_points(ctx: &ParameterContext, k: usize) -> Vec<Point> {
    use crate::scalar::{Coeff, Gauss, Rat, Sym};
    let pyth = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25), (20, 21, 29), (12, 35, 37), (9, 40, 41)];
    let ratios = [(2, 1), (3, 2), (5, 3), (7, 4), (4, 5), (9, 7), (11, 6)];
    (0..k)
        .map(|i| {
            let (a, b, c) = pyth[i % pyth.len()];
            let rh = Coeff::gauss(Gauss::new(Rat::new(a.into(), c.into()), Rat::new(b.into(), c.into())));
            let r = &rh * &rh;
            let mut pt = Point::new().set_r_sqrt(rh).set(Sym::Hbar, Coeff::from_frac(3, 2 + i as i64));
            let mut j = i;
            let mut next = || {
                let (p, q) = ratios[j % ratios.len()];
                j += 1;
                &r * &Coeff::from_frac(p, q)
            };
            for a in 1..=ctx.n {
                for b in a + 1..=ctx.n {
                    let s = Sym::Q(a as u8, b as u8);
                    if ctx.owns(s) {
                        pt = pt.set(s, next());
                    }
                }
                let s = Sym::QDot(a as u8);
                if ctx.owns(s) {
                    pt = pt.set(s, next());
                }
            }
            pt
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Coeff, Sym};

    #[test]
    fn weights_n4() {
        let rho: Vec<i32> = (0..4).map(|a| rho2(4, a)).collect();
        assert_eq!(rho, vec![2, 0, 0, -2]);
        let rho: Vec<i32> = (0..3).map(|a| rho2(3, a)).collect();
        assert_eq!(rho, vec![1, 0, -1]);
    }

    #[test]
    fn metric_support_and_trace() {
        let ctx = ParameterContext::multi(4);
        let (c, _, _, d, _) = build_metric(&ctx, 1).unwrap();
        assert!(c.get(&[0, 1]).is_zero());
        let mut tr = Scalar::zero();
        for x in &d {
            tr = tr.add(x);
        }
        assert!(tr.equals(&q_n(&Scalar::r(1), 4).inv().unwrap()));
    }

    #[test]
    fn classical_limit_is_flip() {
        let ctx = ParameterContext::multi(4);
        let b = RMatrixBundle::build(&ctx).unwrap();
        let pt = Point::new()
            .set_r_sqrt(Coeff::one())
            .set(Sym::Q(1, 2), Coeff::one())
            .set(Sym::Q(1, 3), Coeff::one());
        assert!(b.rhat.eval(&pt).unwrap().equals(&Tensor::flip(4)));
    }

    #[test]
    fn twist_entry_position() {
        let ctx = ParameterContext::multi(4);
        let b = RMatrixBundle::build(&ctx).unwrap();
        let want = Scalar::r(1).div(&ctx.q(1, 2).unwrap()).unwrap();
        assert!(b.rhat.get(&[1, 0, 0, 1]).equals(&want));
        assert_eq!(b.rhat.get(&[0, 0, 0, 0]), &Scalar::r(1));
    }

    #[test]
    fn n4_suite_passes() {
        let b = RMatrixBundle::build(&ParameterContext::multi(4)).unwrap();
        let rep = b.verify(true);
        assert!(rep.all_passed(), "{}", rep);
    }

    #[test]
    fn wrong_root_fails() {
        let b = RMatrixBundle::build(&ParameterContext::multi(4)).unwrap();
        let res = b.cubic_residual(&Scalar::r(5)).unwrap();
        assert!(res.first_nonzero().is_some());
    }

    #[test]
    fn n3_uniparametric_passes() {
        let b = RMatrixBundle::build(&ParameterContext::uni(3)).unwrap();
        assert!(b.verify(true).all_passed());
    }

    #[test]
    fn p0_is_twist_neutral() {
        let m = RMatrixBundle::build(&ParameterContext::multi(4)).unwrap();
        let u = RMatrixBundle::build(&ParameterContext::uni(4)).unwrap();
        assert!(m.p0.equals(&u.p0));
    }
}
