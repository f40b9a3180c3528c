use std::fmt;
use std::iter::Sum;

use num_traits::Float;

use crate::physics::Precision;

/// Floating-point element type of a simulation (IEEE-754 binary32 or binary64).
///
/// Every kernel is written once against this trait and instantiated for both
/// precisions.
pub trait Real: Float + Default + Send + Sync + Sum + fmt::Debug + fmt::Display + 'static {
    const PRECISION: Precision;
    const HALF: Self;

    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;

    /// Raw IEEE-754 bit pattern, widened to 64 bits.
    fn to_bits_u64(self) -> u64;

    /// `self * b + c`, fused into one rounding when `FUSED` is set.
    ///
    /// Callers must only pass `FUSED = true` from code compiled with a hardware
    /// FMA unit; otherwise the fused path lowers to a libm call.
    fn mul_add_if<const FUSED: bool>(self, b: Self, c: Self) -> Self;

    /// Lowercase hexadecimal floating-point literal, e.g. `0x1.8p+1`.
    fn to_hex(self) -> String;

    /// Parses a hexadecimal floating-point literal; `None` if the text is not
    /// one or is not exactly representable.
    fn parse_hex(text: &str) -> Option<Self>;
}

macro_rules! impl_real {
    ($t:ty, $prec:expr, $bits:ty, $mant:expr, $bias:expr, $parse:path) => {
        impl Real for $t {
            const PRECISION: Precision = $prec;
            const HALF: Self = 0.5;

            #[inline(always)]
            fn from_f64(x: f64) -> Self {
                x as $t
            }

            #[inline(always)]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline(always)]
            fn to_bits_u64(self) -> u64 {
                self.to_bits() as u64
            }

            #[inline(always)]
            fn mul_add_if<const FUSED: bool>(self, b: Self, c: Self) -> Self {
                if FUSED {
                    self.mul_add(b, c)
                } else {
                    self * b + c
                }
            }

            fn to_hex(self) -> String {
                const MANT_BITS: u32 = $mant;
                const EXP_MASK: $bits = (1 << (<$bits>::BITS - 1 - MANT_BITS)) - 1;
                const FRAC_MASK: $bits = (1 << MANT_BITS) - 1;
                // Pad the fraction to a whole number of hex digits.
                const PAD: u32 = (4 - MANT_BITS % 4) % 4;
                const DIGITS: usize = ((MANT_BITS + PAD) / 4) as usize;

                let bits = self.to_bits();
                let sign = if bits >> (<$bits>::BITS - 1) == 1 { "-" } else { "" };
                let biased = ((bits >> MANT_BITS) & EXP_MASK) as i32;
                let mut frac = bits & FRAC_MASK;
                assert!(
                    biased != EXP_MASK as i32,
                    "non-finite value has no hex-float form"
                );

                let exp = if biased == 0 {
                    if frac == 0 {
                        return format!("{sign}0x0p+0");
                    }
                    // Subnormal: shift the leading one into the implicit bit.
                    let mut exp = 1 - $bias;
                    while frac & (1 << MANT_BITS) == 0 {
                        frac <<= 1;
                        exp -= 1;
                    }
                    frac &= FRAC_MASK;
                    exp
                } else {
                    biased - $bias
                };

                let digits = format!("{:0width$x}", (frac as u64) << PAD, width = DIGITS);
                let digits = digits.trim_end_matches('0');
                if digits.is_empty() {
                    format!("{sign}0x1p{exp:+}")
                } else {
                    format!("{sign}0x1.{digits}p{exp:+}")
                }
            }

            fn parse_hex(text: &str) -> Option<Self> {
                $parse(text, false).ok()
            }
        }
    };
}

impl_real!(f32, Precision::Single, u32, 23, 127, hexf_parse::parse_hexf32);
impl_real!(f64, Precision::Double, u64, 52, 1023, hexf_parse::parse_hexf64);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hex_literals() {
        assert_eq!(1.0f64.to_hex(), "0x1p+0");
        assert_eq!(1.0f32.to_hex(), "0x1p+0");
        assert_eq!(3.0f64.to_hex(), "0x1.8p+1");
        assert_eq!((-0.5f64).to_hex(), "-0x1p-1");
        assert_eq!(0.0f64.to_hex(), "0x0p+0");
        assert_eq!((-0.0f32).to_hex(), "-0x0p+0");
        assert_eq!(0.1f32.to_hex(), "0x1.99999ap-4");
        assert_eq!(0.1f64.to_hex(), "0x1.999999999999ap-4");
        assert_eq!(f64::from_bits(1).to_hex(), "0x1p-1074");
        assert_eq!(f32::from_bits(1).to_hex(), "0x1p-149");
    }

    #[test]
    fn parse_rejects_decimal_and_specials() {
        assert_eq!(f64::parse_hex("1.0"), None);
        assert_eq!(f64::parse_hex("inf"), None);
        assert_eq!(f64::parse_hex("nan"), None);
        assert_eq!(f64::parse_hex("0x1.8p+1"), Some(3.0));
    }

    proptest! {
        #[test]
        fn hex_round_trip_f64(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back = f64::parse_hex(&x.to_hex()).unwrap();
            prop_assert_eq!(back.to_bits(), bits);
        }

        #[test]
        fn hex_round_trip_f32(bits in any::<u32>()) {
            let x = f32::from_bits(bits);
            prop_assume!(x.is_finite());
            let back = f32::parse_hex(&x.to_hex()).unwrap();
            prop_assert_eq!(back.to_bits(), bits);
        }
    }
}
