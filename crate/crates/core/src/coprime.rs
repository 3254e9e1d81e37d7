//! Least-degree coprime polynomial search through the `X^(2^i)+X` filtration.
//!
//! `X^(2^i)+X` is the product of every irreducible polynomial whose degree
//! divides `i`. Scanning those moduli in order, the first nonzero
//! remainder `r = f mod (X^(2^j)+X)` certifies that all irreducibles of
//! degree below `j` divide `f` while at least one of degree `j` does not —
//! and coprimality of a degree-`j` candidate with `f` can be decided
//! against the small remainder `r` instead of `f` itself.

use crate::gf2poly::{irreducibles_of_degree, BinPoly};
use crate::{Error, Result};

/// One row of the filtration scan, as reported in the CLI trace.
#[derive(Clone, Debug)]
pub struct FiltrationStep {
    pub i: usize,
    /// `X^(2^i) + X`
    pub modulus: BinPoly,
    pub remainder: BinPoly,
}

/// Outcome of [`least_degree_coprime`].
#[derive(Clone, Debug)]
pub struct CoprimeResult {
    /// The least-degree irreducible coprime to `f`, or `None` when the
    /// scan exhausted the cap (the original field stands).
    pub g: Option<BinPoly>,
    /// Degree at which `g` was found.
    pub j: Option<usize>,
    /// First filtration modulus with a nonzero remainder.
    pub first_nonzero_p: Option<BinPoly>,
    /// `f mod first_nonzero_p`.
    pub reduced_remainder: Option<BinPoly>,
    /// Largest `i` the scan was allowed to test.
    pub searched_cap: usize,
    /// Every step taken, for report rendering.
    pub trace: Vec<FiltrationStep>,
}

/// Finds the least-degree irreducible polynomial coprime with `f`,
/// considering degrees `1..=cap`. Ties within the winning degree break by
/// ascending coefficient bit pattern.
pub fn least_degree_coprime(f: &BinPoly, cap: usize) -> Result<CoprimeResult> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if cap < 1 {
        return Err(Error::InvalidArgument("coprime search cap must be >= 1".into()));
    }
    let mut trace = Vec::new();
    for i in 1..=cap {
        let n = 1usize << i;
        let p = BinPoly::x_pow_n_plus_x(n);
        let r = f.fold_mod_xn_plus_x(n)?;
        trace.push(FiltrationStep { i, modulus: p.clone(), remainder: r.clone() });
        if r.is_zero() {
            continue;
        }
        // all irreducibles of degree < i divide f; some degree-i one is
        // coprime, and testing gcd against r instead of f is licensed by
        // g | p together with gcd(f, g) = gcd(f mod p, g)
        for cand in irreducibles_of_degree(i)? {
            if cand.gcd(&r)?.is_one() {
                debug_assert!(cand.gcd(f).unwrap().is_one());
                return Ok(CoprimeResult {
                    g: Some(cand),
                    j: Some(i),
                    first_nonzero_p: Some(p),
                    reduced_remainder: Some(r),
                    searched_cap: cap,
                    trace,
                });
            }
        }
        // unreachable in exact arithmetic: a coprime candidate of degree i
        // must exist once r is nonzero
        return Err(Error::Inconsistent(
            "nonzero filtration remainder but no coprime irreducible".into(),
        ));
    }
    Ok(CoprimeResult {
        g: None,
        j: None,
        first_nonzero_p: None,
        reduced_remainder: None,
        searched_cap: cap,
        trace,
    })
}

/// Whether `g` is coprime with every polynomial in `fs`, decided on the
/// product: gcd(g, Πf_i) = 1 if and only if gcd(g, f_i) = 1 for all i.
pub fn product_coprime_check(fs: &[BinPoly], g: &BinPoly) -> Result<bool> {
    if g.is_zero() || fs.iter().any(BinPoly::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    let mut prod = BinPoly::one();
    for f in fs {
        prod = prod.mul(f);
    }
    Ok(g.gcd(&prod)?.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BinPoly {
        s.parse().unwrap()
    }

    #[test]
    fn unit_input_finds_x() {
        let res = least_degree_coprime(&BinPoly::one(), 4).unwrap();
        assert_eq!(res.g, Some(p("X")));
        assert_eq!(res.j, Some(1));
        assert_eq!(res.first_nonzero_p, Some(p("X^2+X")));
        assert_eq!(res.reduced_remainder, Some(BinPoly::one()));
    }

    #[test]
    fn skips_degrees_whose_irreducibles_all_divide() {
        // f = X (X+1) (X^2+X+1): every irreducible of degree 1 and 2 divides
        let f = p("X").mul(&p("X+1")).mul(&p("X^2+X+1"));
        let res = least_degree_coprime(&f, 5).unwrap();
        assert_eq!(res.j, Some(3));
        assert_eq!(res.g, Some(p("X^3+X+1")));
        // the found g never divides f
        assert!(!f.rem(res.g.as_ref().unwrap()).unwrap().is_zero());
    }

    #[test]
    fn cap_exhaustion_reports_absent() {
        // X^4+X is divisible by all irreducibles of degrees 1 and 2
        let f = BinPoly::x_pow_n_plus_x(4);
        let res = least_degree_coprime(&f, 2).unwrap();
        assert_eq!(res.g, None);
        assert_eq!(res.trace.len(), 2);
        assert!(res.trace.iter().all(|s| s.remainder.is_zero()));
    }

    #[test]
    fn zero_input_rejected() {
        assert!(matches!(
            least_degree_coprime(&BinPoly::zero(), 3),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn filtration_certificate() {
        // whenever the search lands at degree j, every irreducible of a
        // smaller degree divides f (checkable exhaustively at this scale)
        let f = p("X^6+X^5+X^3+X"); // = X (X+1)^2 (X^3+X^2+1)
        let res = least_degree_coprime(&f, 4).unwrap();
        let j = res.j.unwrap();
        for d in 1..j {
            for q in irreducibles_of_degree(d).unwrap() {
                assert!(f.rem(&q).unwrap().is_zero(), "{q} should divide f");
            }
        }
    }

    #[test]
    fn product_coprime_examples() {
        assert!(product_coprime_check(&[p("X"), p("X+1")], &p("X^2+X+1")).unwrap());
        assert!(!product_coprime_check(&[p("X"), p("X+1")], &p("X")).unwrap());
        let ones = vec![BinPoly::one(), BinPoly::one(), BinPoly::one()];
        assert!(product_coprime_check(&ones, &p("X^5+X^2+1")).unwrap());
        assert!(product_coprime_check(&[BinPoly::zero()], &p("X")).is_err());
    }

    #[test]
    fn product_check_equals_elementwise() {
        let fs = [p("X^3+X+1"), p("X^2+X"), p("X^4+X^3+1")];
        for g in [p("X"), p("X+1"), p("X^2+X+1"), p("X^3+X^2+1"), p("X^5+X^2+1")] {
            let prod = product_coprime_check(&fs, &g).unwrap();
            let each = fs.iter().all(|f| f.gcd(&g).unwrap().is_one());
            assert_eq!(prod, each, "g={g}");
        }
    }
}
