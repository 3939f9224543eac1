//! Binary polynomials packed into a machine word.
//!
//! Bit `i` of the mask is the coefficient of `x^i`. The hex notation used
//! throughout the crate is the full coefficient mask, leading and constant
//! bits included: `x^16 + x^7 + x^6 + x^5 + x^4 + x + 1` is written `100f3`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported degree. One `u64` holds every polynomial.
pub const MAX_DEGREE: u32 = 63;

/// A CRC generator polynomial: degree `p >= 1` with nonzero leading and
/// constant coefficients.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Gf2Poly {
    coeffs: u64,
}

impl Gf2Poly {
    pub fn new(coeffs: u64) -> Result<Self> {
        if coeffs < 2 {
            return Err(Error::InvalidPolynomial(format!(
                "{coeffs:x}: generator must have degree at least 1"
            )));
        }
        if coeffs & 1 == 0 {
            return Err(Error::InvalidPolynomial(format!(
                "{coeffs:x}: constant term is zero (divisible by x)"
            )));
        }
        Ok(Gf2Poly { coeffs })
    }

    /// Parses a full hex mask (both end terms included), case-insensitive, without `0x`.
    pub fn parse_hex(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::InvalidPolynomial("empty hex string".into()));
        }
        if !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::InvalidPolynomial(format!("{text:?} is not hexadecimal")));
        }
        let coeffs = u64::from_str_radix(text, 16).map_err(|_| {
            Error::InvalidPolynomial(format!(
                "{text:?} exceeds the degree limit of {MAX_DEGREE}"
            ))
        })?;
        Self::new(coeffs)
    }

    pub fn to_hex(self) -> String {
        format!("{:x}", self.coeffs)
    }

    #[inline]
    pub fn coeffs(self) -> u64 {
        self.coeffs
    }

    #[inline]
    pub fn degree(self) -> u32 {
        63 - self.coeffs.leading_zeros()
    }

    /// The low `p` coefficients, i.e. `x^p mod g`.
    #[inline]
    pub fn low_bits(self) -> u64 {
        self.coeffs & self.residue_mask()
    }

    /// Mask selecting the `p` bits of a residue modulo `g`.
    #[inline]
    pub fn residue_mask(self) -> u64 {
        (1u64 << self.degree()) - 1
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.coeffs.count_ones()
    }

    /// Coefficient vector reversed over `p + 1` bits.
    pub fn reciprocal(self) -> Self {
        let p = self.degree();
        Gf2Poly {
            coeffs: self.coeffs.reverse_bits() >> (63 - p),
        }
    }

    /// The numerically smaller of `g` and its reciprocal.
    pub fn canonical(self) -> Self {
        self.min(self.reciprocal())
    }

    pub fn is_canonical(self) -> bool {
        self.coeffs <= self.reciprocal().coeffs
    }

    pub fn is_self_reciprocal(self) -> bool {
        self == self.reciprocal()
    }

    /// `(x * residue) mod g` for a `p`-bit residue.
    #[inline]
    pub fn mulx_mod(self, residue: u64) -> u64 {
        mulx_mod(residue, self.coeffs, self.degree())
    }

    /// Smallest `m >= 1` with `x^m = 1 mod g`.
    pub fn order(self) -> Result<u64> {
        let p = self.degree();
        let g = self.coeffs;
        let limit = 1u64.checked_shl(p).unwrap_or(u64::MAX);
        let mut r = 1u64;
        for m in 1..=limit {
            r = mulx_mod(r, g, p);
            if r == 1 {
                return Ok(m);
            }
        }
        Err(Error::Internal(format!(
            "no return to 1 within 2^{p} steps for {}",
            self.to_hex()
        )))
    }

    /// Parity bits `r(x) = x^p i(x) mod g(x)`; `info[j]` is the coefficient
    /// of `x^j`.
    pub fn crc_remainder(self, info: &[bool]) -> u64 {
        let p = self.degree();
        let g = self.coeffs;
        let low = self.low_bits();
        info.iter().rev().fold(0u64, |r, &bit| {
            let r = mulx_mod(r, g, p);
            if bit {
                r ^ low
            } else {
                r
            }
        })
    }
}

#[inline(always)]
fn mulx_mod(residue: u64, g: u64, p: u32) -> u64 {
    let shifted = (residue as u128) << 1;
    if (shifted >> p) & 1 == 1 {
        (shifted as u64) ^ g
    } else {
        shifted as u64
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.coeffs)
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({:x})", self.coeffs)
    }
}

impl FromStr for Gf2Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

impl TryFrom<String> for Gf2Poly {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse_hex(&s)
    }
}

impl From<Gf2Poly> for String {
    fn from(g: Gf2Poly) -> String {
        g.to_hex()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gen(mask: u64) -> Gf2Poly {
        Gf2Poly::new(mask).unwrap()
    }

    // Schoolbook carry-less product and remainder, independent of mulx_mod.
    fn clmul(a: u64, b: u64) -> u128 {
        let mut acc = 0u128;
        for i in 0..64 {
            if (b >> i) & 1 == 1 {
                acc ^= (a as u128) << i;
            }
        }
        acc
    }

    fn long_div_rem(mut a: u128, g: u64) -> u64 {
        let dg = 63 - g.leading_zeros();
        while a != 0 {
            let da = 127 - a.leading_zeros();
            if da < dg {
                break;
            }
            a ^= (g as u128) << (da - dg);
        }
        a as u64
    }

    #[test]
    fn parse_full_hex_notation() {
        let g = Gf2Poly::parse_hex("100f3").unwrap();
        let expected = (1 << 16) | (1 << 7) | (1 << 6) | (1 << 5) | (1 << 4) | (1 << 1) | 1;
        assert_eq!(g.coeffs(), expected);
        assert_eq!(g.degree(), 16);

        assert_eq!(Gf2Poly::parse_hex("3").unwrap().coeffs(), 0b11);
        let g = Gf2Poly::parse_hex("93F").unwrap();
        assert_eq!(g.coeffs(), 0x93f);
        assert_eq!(g.degree(), 11);
        assert_eq!(g.to_hex(), "93f");
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(Gf2Poly::parse_hex("").is_err());
        assert!(Gf2Poly::parse_hex("0x11").is_err());
        assert!(Gf2Poly::parse_hex("12g").is_err());
        assert!(Gf2Poly::parse_hex("1").is_err());
        assert!(Gf2Poly::parse_hex("0").is_err());
        // divisible by x
        assert!(Gf2Poly::parse_hex("1a").is_err());
        assert!(Gf2Poly::parse_hex("10000000000000001").is_err());
        assert!(Gf2Poly::parse_hex("8000000000000001").is_ok());
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(gen(0x158ff).reciprocal(), gen(0x1fe35));
        assert_eq!(gen(0x1a2eb).reciprocal(), gen(0x1ae8b));
        assert_eq!(gen(0xb).reciprocal(), gen(0xd));
        assert_eq!(gen(0x8000000000000001).reciprocal(), gen(0x8000000000000001));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(gen(0x1fe35).canonical(), gen(0x158ff));
        assert_eq!(gen(0x158ff).canonical(), gen(0x158ff));
        assert_eq!(gen(0x7).canonical(), gen(0x7));
        let g = gen(0x93f);
        assert_eq!(g.canonical(), g.min(g.reciprocal()));
    }

    #[test]
    fn mulx_mod_examples() {
        let g = gen(0xb);
        assert_eq!(g.mulx_mod(0x4), 0x3);
        assert_eq!(gen(0x13).mulx_mod(1), 0x2);
        let mut r = 1;
        let mut steps = 0;
        loop {
            r = g.mulx_mod(r);
            steps += 1;
            if r == 1 {
                break;
            }
        }
        assert_eq!(steps, 7);
    }

    #[test]
    fn order_examples() {
        assert_eq!(gen(0x93f).order().unwrap(), 762);
        assert_eq!(gen(0xe21).order().unwrap(), 2047);
        assert_eq!(gen(0x3).order().unwrap(), 1);
        assert_eq!(gen(0x1a2eb).order().unwrap(), 32767);
        assert_eq!(gen(0xb).order().unwrap(), 7);
    }

    #[test]
    fn crc_remainder_examples() {
        assert_eq!(gen(0x11021).crc_remainder(&[false; 40]), 0);
        assert_eq!(gen(0xb).crc_remainder(&[true]), 0x3);
        assert_eq!(gen(0xb).crc_remainder(&[]), 0);
    }

    #[test]
    fn crc_remainder_32_bit_message_divides() {
        let g = gen(0x11021);
        let info: u64 = 0xdead_beef;
        let bits: Vec<bool> = (0..32).map(|j| (info >> j) & 1 == 1).collect();
        let r = g.crc_remainder(&bits);
        let word = ((info as u128) << 16) ^ r as u128;
        assert_eq!(long_div_rem(word, g.coeffs()), 0);
    }

    fn arb_generator(max_degree: u32) -> impl Strategy<Value = Gf2Poly> {
        (1..=max_degree, any::<u64>()).prop_map(|(p, bits)| {
            let mask = if p == 63 { u64::MAX } else { (1u64 << (p + 1)) - 1 };
            gen((bits & mask) | (1 << p) | 1)
        })
    }

    proptest! {
        #[test]
        fn hex_round_trip(g in arb_generator(63)) {
            prop_assert_eq!(Gf2Poly::parse_hex(&g.to_hex()).unwrap(), g);
            prop_assert_eq!(Gf2Poly::parse_hex(&g.to_hex().to_uppercase()).unwrap(), g);
        }

        #[test]
        fn reciprocal_is_involution(g in arb_generator(63)) {
            prop_assert_eq!(g.reciprocal().reciprocal(), g);
            prop_assert_eq!(g.reciprocal().degree(), g.degree());
            prop_assert_eq!(g.canonical().canonical(), g.canonical());
        }

        #[test]
        fn order_matches_reciprocal(g in arb_generator(14)) {
            prop_assert_eq!(g.order().unwrap(), g.reciprocal().order().unwrap());
        }

        #[test]
        fn mulx_mod_matches_schoolbook(g in arb_generator(40), r in any::<u64>()) {
            let r = r & g.residue_mask();
            let expected = long_div_rem(clmul(r, 2), g.coeffs());
            prop_assert_eq!(g.mulx_mod(r), expected);
        }

        #[test]
        fn codeword_divides_by_generator(
            g in arb_generator(32),
            bits in proptest::collection::vec(any::<bool>(), 0..64),
        ) {
            let r = g.crc_remainder(&bits);
            let info = bits.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j));
            let word = clmul(info, 1 << g.degree()) ^ r as u128;
            prop_assert_eq!(long_div_rem(word, g.coeffs()), 0);
        }
    }
}
