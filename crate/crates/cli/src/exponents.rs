use anyhow::{bail, Result};
use clap::Args;
use findist::exponents::{
    ball_s, ball_sigma, codistortion_exponent, composition_exponent, corollary_r, inverse_exponent, remark_rho,
};
use findist::Exponent;

#[derive(Debug, Args)]
pub struct ExponentArgs {
    /// Spatial dimension.
    #[arg(short = 'n', default_value_t = 3)]
    pub n: u32,
    /// Sobolev exponent of the deformation (`inf` allowed).
    #[arg(short = 'p')]
    pub p: Option<Exponent>,
    /// Integrability of the distortion / adjugate term (`inf` allowed).
    #[arg(short = 'q')]
    pub q: Option<Exponent>,
    /// Exponent of the Jacobian growth term.
    #[arg(short = 'r')]
    pub r: Option<Exponent>,
    /// Exponent of the Jacobian barrier term.
    #[arg(short = 'm')]
    pub m: Option<Exponent>,
    /// Inner-distortion exponent; yields `r` when `-r` is not given.
    #[arg(short = 's')]
    pub s: Option<Exponent>,
}

/// Every quantity derivable from the given flags, as `(label, value)` pairs.
pub fn derive(a: &ExponentArgs) -> Result<Vec<(&'static str, Exponent)>> {
    let n = a.n;
    if n < 2 {
        bail!("dimension n must be at least 2, got {n}");
    }
    let mut out = Vec::new();
    let mut s_out = None;
    if let (Some(q), Some(m)) = (a.q, a.m) {
        if n != 3 {
            bail!("σ is defined for n = 3 only, got n = {n}");
        }
        let sigma = ball_sigma(q, m)?;
        out.push(("σ", sigma));
        if let Some(r) = a.r {
            s_out = Some(ball_s(sigma, r, n)?);
        }
    }
    if let Some(s) = s_out {
        out.push(("s", s));
    }
    if let Some(p) = a.p {
        out.push(("p′", inverse_exponent(p, n)?));
    }
    if let Some(q) = a.q {
        out.push(("q′", inverse_exponent(q, n)?));
    }
    if let (Some(p), Some(q)) = (a.p, a.q) {
        out.push(("ϰ", composition_exponent(q, p)?));
        out.push(("ϱ", codistortion_exponent(q, p, n)?));
    }
    let r = match (a.r, a.s) {
        (Some(r), _) => Some(r),
        (None, Some(s)) => {
            let r = corollary_r(s, n)?;
            out.push(("r", r));
            Some(r)
        }
        (None, None) => None,
    };
    if let Some(r) = r {
        // alongside σ the growth exponent may legitimately exceed n; ρ is then skipped
        let in_range = r >= Exponent::int(n as i128 - 1) && r <= Exponent::int(n as i128);
        let ball = a.q.is_some() && a.m.is_some();
        if in_range || !ball {
            out.push(("ρ", remark_rho(r, n)?));
        }
    }
    if out.is_empty() {
        bail!("nothing to derive: pass at least one of -p, -q (with -m), -r or -s");
    }
    Ok(out)
}

pub fn run(a: &ExponentArgs) -> Result<bool> {
    for (label, v) in derive(a)? {
        println!("{label} = {v}");
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(n: u32, p: Option<&str>, q: Option<&str>, r: Option<&str>, m: Option<&str>, s: Option<&str>) -> ExponentArgs {
        let e = |v: Option<&str>| v.map(|x| x.parse().unwrap());
        ExponentArgs { n, p: e(p), q: e(q), r: e(r), m: e(m), s: e(s) }
    }

    fn lookup(v: &[(&str, Exponent)], label: &str) -> Option<String> {
        v.iter().find(|(l, _)| *l == label).map(|(_, x)| x.to_string())
    }

    #[test]
    fn ball_tuple() {
        let v = derive(&args(3, None, Some("4"), Some("2"), Some("9"), None)).unwrap();
        assert_eq!(lookup(&v, "σ").as_deref(), Some("40/13"));
        assert_eq!(lookup(&v, "s").as_deref(), Some("80/79"));
        assert_eq!(lookup(&v, "q′").as_deref(), Some("2"));
        assert_eq!(lookup(&v, "ρ").as_deref(), Some("1"));
    }

    #[test]
    fn barrier_exponent_out_of_range() {
        let err = derive(&args(3, None, Some("4"), None, Some("8"), None)).unwrap_err();
        assert!(err.to_string().contains("m must exceed 2q/(q−3) = 8"), "{err}");
    }

    #[test]
    fn critical_sobolev_exponent() {
        let v = derive(&args(3, Some("2"), None, None, None, None)).unwrap();
        assert_eq!(lookup(&v, "p′").as_deref(), Some("inf"));
    }

    #[test]
    fn r_from_s() {
        let v = derive(&args(3, None, None, None, None, Some("1"))).unwrap();
        assert_eq!(lookup(&v, "r").as_deref(), Some("2"));
        assert_eq!(lookup(&v, "ρ").as_deref(), Some("1"));
    }
}
