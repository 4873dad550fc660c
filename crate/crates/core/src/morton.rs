//! Morton (Z-order) codes over quantized (x, y, t) coordinates.
//!
//! A code interleaves the bits of the three coordinates into one 64-bit
//! integer: bit `b` of x lands at code bit `3b`, y at `3b + 1`, t at `3b + 2`.
//! Each coordinate gets 21 bits, so bit 63 is always zero. Clearing the `k`
//! least significant bits of a code groups nearby points into one memo cell;
//! when `k` is divisible by 3 the cell is an axis-aligned cube of
//! `2^(k/3)` grid steps per side.

use crate::scenario::SpaceTimePoint;
use thiserror::Error;

/// Bits available per coordinate in a 64-bit code.
pub const COORD_BITS: u32 = 21;
/// Exclusive upper bound for a quantized coordinate.
pub const COORD_LIMIT: u32 = 1 << COORD_BITS;

/// Default subunits per map unit for [`QuantConfig`]. With the default mask
/// width this puts memo cells at 32 map units per axis, which keeps most of
/// a benchmark map's cells resident in a default-sized store.
pub const DEFAULT_SCALE: u32 = 2;
/// Default number of masked low bits.
pub const DEFAULT_MASK_BITS: u32 = 18;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MortonError {
    #[error("coordinate {0} does not fit in {COORD_BITS} bits")]
    CoordOutOfRange(u32),
    #[error("point ({x}, {y}, {t}) quantizes outside the {COORD_BITS}-bit grid")]
    PointOutOfRange { x: f64, y: f64, t: f64 },
    #[error("quantization scale must be a positive power of two, got {0}")]
    BadScale(u32),
    #[error("mask bits must be at most 63, got {0}")]
    BadMaskBits(u32),
    #[error("scale {scale} cannot represent extent {extent} in {COORD_BITS} bits")]
    ExtentTooLarge { scale: u32, extent: f64 },
}

/// A 3D Morton code. Bit 63 is always clear.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MortonKey(u64);

impl MortonKey {
    pub fn from_raw(code: u64) -> Self {
        MortonKey(code)
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    /// Clears the `k` least significant bits, keeping the rest intact.
    pub fn mask(self, k: u32) -> MortonKey {
        assert!(k <= 63, "mask width {k} out of range");
        MortonKey(self.0 & (!0u64 << k))
    }
}

impl std::fmt::Debug for MortonKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MortonKey({:#018x})", self.0)
    }
}

/// Spread the low 21 bits of `v` so bit b moves to bit 3b.
fn spread(v: u32) -> u64 {
    let mut x = v as u64 & 0x1f_ffff;
    x = (x | (x << 32)) & 0x1f00000000ffff;
    x = (x | (x << 16)) & 0x1f0000ff0000ff;
    x = (x | (x << 8)) & 0x100f00f00f00f00f;
    x = (x | (x << 4)) & 0x10c30c30c30c30c3;
    x = (x | (x << 2)) & 0x1249249249249249;
    x
}

/// Inverse of [`spread`]: collect every third bit back into 21 bits.
fn compact(v: u64) -> u32 {
    let mut x = v & 0x1249249249249249;
    x = (x | (x >> 2)) & 0x10c30c30c30c30c3;
    x = (x | (x >> 4)) & 0x100f00f00f00f00f;
    x = (x | (x >> 8)) & 0x1f0000ff0000ff;
    x = (x | (x >> 16)) & 0x1f00000000ffff;
    x = (x | (x >> 32)) & 0x1f_ffff;
    x as u32
}

/// Interleaves three 21-bit coordinates into one code (x least significant).
pub fn encode3(xi: u32, yi: u32, ti: u32) -> Result<MortonKey, MortonError> {
    for v in [xi, yi, ti] {
        if v >= COORD_LIMIT {
            return Err(MortonError::CoordOutOfRange(v));
        }
    }
    Ok(MortonKey(
        spread(xi) | (spread(yi) << 1) | (spread(ti) << 2),
    ))
}

/// Recovers the three coordinates of an unmasked code.
pub fn decode3(key: MortonKey) -> (u32, u32, u32) {
    let c = key.raw();
    (compact(c), compact(c >> 1), compact(c >> 2))
}

/// Fixed-point quantization plus mask width: the projection from continuous
/// map coordinates onto memo cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantConfig {
    scale: u32,
    mask_bits: u32,
}

impl QuantConfig {
    pub fn new(scale: u32, mask_bits: u32) -> Result<Self, MortonError> {
        if !scale.is_power_of_two() {
            return Err(MortonError::BadScale(scale));
        }
        if mask_bits > 63 {
            return Err(MortonError::BadMaskBits(mask_bits));
        }
        Ok(QuantConfig { scale, mask_bits })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn mask_bits(&self) -> u32 {
        self.mask_bits
    }

    /// Checks that every coordinate in `[0, extent]` quantizes into 21 bits.
    pub fn check_extent(&self, extent: f64) -> Result<(), MortonError> {
        if extent * self.scale as f64 >= COORD_LIMIT as f64 {
            return Err(MortonError::ExtentTooLarge {
                scale: self.scale,
                extent,
            });
        }
        Ok(())
    }

    fn quantize(&self, v: f64) -> Option<u32> {
        if !v.is_finite() || v < 0.0 {
            return None;
        }
        let q = (v * self.scale as f64).floor();
        if q >= COORD_LIMIT as f64 {
            return None;
        }
        Some(q as u32)
    }

    /// Quantizes a point, interleaves, and masks. Two points map to the same
    /// key exactly when they share a memo cell.
    pub fn key_of(&self, p: SpaceTimePoint) -> Result<MortonKey, MortonError> {
        let out = MortonError::PointOutOfRange {
            x: p.x,
            y: p.y,
            t: p.t,
        };
        let xi = self.quantize(p.x).ok_or(out.clone())?;
        let yi = self.quantize(p.y).ok_or(out.clone())?;
        let ti = self.quantize(p.t).ok_or(out)?;
        let key = encode3(xi, yi, ti)?;
        Ok(key.mask(self.mask_bits))
    }

    /// Memo cell side length in map units per spatial axis. Exact when the
    /// mask width is divisible by 3.
    pub fn cell_side(&self) -> f64 {
        2f64.powf(self.mask_bits as f64 / 3.0) / self.scale as f64
    }
}

impl Default for QuantConfig {
    fn default() -> Self {
        QuantConfig {
            scale: DEFAULT_SCALE,
            mask_bits: DEFAULT_MASK_BITS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Places each input bit individually; the implementation must agree.
    fn encode3_oracle(xi: u32, yi: u32, ti: u32) -> u64 {
        let mut code = 0u64;
        for b in 0..COORD_BITS {
            code |= ((xi as u64 >> b) & 1) << (3 * b);
            code |= ((yi as u64 >> b) & 1) << (3 * b + 1);
            code |= ((ti as u64 >> b) & 1) << (3 * b + 2);
        }
        code
    }

    #[test]
    fn encode_zero() {
        assert_eq!(encode3(0, 0, 0).unwrap().raw(), 0);
    }

    #[test]
    fn encode_matches_oracle_on_small_values() {
        assert_eq!(encode3_oracle(1, 1, 1), 7);
        assert_eq!(encode3(1, 1, 1).unwrap().raw(), 7);
        assert_eq!(encode3_oracle(2, 0, 0), 8);
        assert_eq!(encode3(2, 0, 0).unwrap().raw(), 8);
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert_eq!(
            encode3(COORD_LIMIT, 0, 0),
            Err(MortonError::CoordOutOfRange(COORD_LIMIT))
        );
        assert!(encode3(COORD_LIMIT - 1, 0, 0).is_ok());
    }

    #[test]
    fn decode_small_values() {
        assert_eq!(decode3(MortonKey::from_raw(0)), (0, 0, 0));
        assert_eq!(decode3(MortonKey::from_raw(7)), (1, 1, 1));
    }

    #[test]
    fn top_bit_never_set() {
        let max = COORD_LIMIT - 1;
        let key = encode3(max, max, max).unwrap();
        assert_eq!(key.raw() >> 63, 0);
    }

    #[test]
    fn mask_clears_low_bits() {
        assert_eq!(MortonKey::from_raw(0b111111).mask(3).raw(), 0b111000);
        let m = MortonKey::from_raw(0xdead_beef);
        assert_eq!(m.mask(0), m);
        assert_eq!(MortonKey::from_raw(1 << 18).mask(18).raw(), 1 << 18);
    }

    #[test]
    fn key_of_groups_points_into_cells() {
        // scale 16, k 18: cells are 64 subunits = 4 map units per axis.
        let q = QuantConfig::new(16, 18).unwrap();
        let a = q.key_of(SpaceTimePoint::new(0.0, 0.0, 0.0)).unwrap();
        let b = q.key_of(SpaceTimePoint::new(3.9, 3.9, 3.9)).unwrap();
        assert_eq!(a, b);
        let c = q.key_of(SpaceTimePoint::new(3.9, 0.0, 0.0)).unwrap();
        let d = q.key_of(SpaceTimePoint::new(4.0, 0.0, 0.0)).unwrap();
        assert_ne!(c, d);
        assert!((q.cell_side() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn key_of_unmasked_separates_grid_points() {
        let q = QuantConfig::new(16, 0).unwrap();
        let a = q.key_of(SpaceTimePoint::new(1.0, 2.0, 3.0)).unwrap();
        let b = q.key_of(SpaceTimePoint::new(1.0625, 2.0, 3.0)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn key_of_rejects_out_of_grid() {
        let q = QuantConfig::new(16, 18).unwrap();
        let far = (COORD_LIMIT as f64) / 16.0 + 1.0;
        assert!(q.key_of(SpaceTimePoint::new(far, 0.0, 0.0)).is_err());
        assert!(q.key_of(SpaceTimePoint::new(-1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn quant_config_validates() {
        assert!(QuantConfig::new(3, 18).is_err());
        assert!(QuantConfig::new(0, 18).is_err());
        assert!(QuantConfig::new(16, 64).is_err());
        let q = QuantConfig::new(16, 18).unwrap();
        assert!(q.check_extent(1000.0).is_ok());
        assert!(q.check_extent(200000.0).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(x in 0..COORD_LIMIT, y in 0..COORD_LIMIT, t in 0..COORD_LIMIT) {
            let key = encode3(x, y, t).unwrap();
            prop_assert_eq!(decode3(key), (x, y, t));
        }

        #[test]
        fn agrees_with_oracle(x in 0..COORD_LIMIT, y in 0..COORD_LIMIT, t in 0..COORD_LIMIT) {
            prop_assert_eq!(encode3(x, y, t).unwrap().raw(), encode3_oracle(x, y, t));
        }

        #[test]
        fn coarser_mask_never_splits_finer_cells(
            raw in 0u64..(1 << 63),
            k1 in 0u32..=63,
            extra in 0u32..=63,
        ) {
            let k2 = (k1 + extra).min(63);
            let key = MortonKey::from_raw(raw);
            // Masking at k2 factors through masking at k1.
            prop_assert_eq!(key.mask(k1).mask(k2), key.mask(k2));
        }

        #[test]
        fn cell_membership_is_floor_division(
            x1 in 0..COORD_LIMIT, y1 in 0..COORD_LIMIT, t1 in 0..COORD_LIMIT,
            x2 in 0..COORD_LIMIT, y2 in 0..COORD_LIMIT, t2 in 0..COORD_LIMIT,
            k3 in 0u32..=7,
        ) {
            let k = 3 * k3;
            let cell = 1u32 << k3;
            let a = encode3(x1, y1, t1).unwrap().mask(k);
            let b = encode3(x2, y2, t2).unwrap().mask(k);
            let same = (x1 / cell, y1 / cell, t1 / cell) == (x2 / cell, y2 / cell, t2 / cell);
            prop_assert_eq!(a == b, same);
        }
    }
}
