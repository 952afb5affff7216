use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::Point;

/// A validated point cloud: `n >= 1` finite coordinates and an optional
/// row-major feature matrix of width `c`.
///
/// Original point indices (positions in `coords`) are the stable identity
/// used by every result type in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<Point>,
    features: Vec<f64>,
    feature_width: usize,
}

impl PointCloud {
    /// Builds a coordinate-only cloud.
    pub fn new(coords: Vec<Point>) -> Result<Self> {
        Self::with_features(coords, Vec::new(), 0)
    }

    /// Builds a cloud with `features.len() == n * width` row-major features.
    pub fn with_features(coords: Vec<Point>, features: Vec<f64>, width: usize) -> Result<Self> {
        if coords.is_empty() {
            bail!(Validation, "point cloud must contain at least one point");
        }
        if let Some((i, _)) = coords
            .iter()
            .enumerate()
            .find(|(_, p)| p.iter().any(|v| !v.is_finite()))
        {
            bail!(Validation, "point {i} has a non-finite coordinate");
        }
        if features.len() != coords.len() * width {
            bail!(
                Validation,
                "expected {} feature values ({} points x width {width}), got {}",
                coords.len() * width,
                coords.len(),
                features.len()
            );
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            bail!(Validation, "point {} has a non-finite feature", pos / width);
        }
        Ok(PointCloud {
            coords,
            features,
            feature_width: width,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// Always false; kept for API symmetry with slices.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &Point {
        &self.coords[i]
    }

    #[inline]
    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Feature width `c`, zero when the cloud carries no features.
    #[inline]
    pub fn feature_width(&self) -> usize {
        self.feature_width
    }

    #[inline]
    pub fn has_features(&self) -> bool {
        self.feature_width > 0
    }

    /// The feature row of point `i` (empty when `c == 0`).
    #[inline]
    pub fn feature(&self, i: usize) -> &[f64] {
        let c = self.feature_width;
        &self.features[i * c..(i + 1) * c]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Returns a copy of the cloud with points reordered by `perm`
    /// (`out[j] = self[perm[j]]`).
    pub fn permuted(&self, perm: &LayoutPermutation) -> PointCloud {
        let coords = perm.iter().map(|&i| self.coords[i]).collect();
        let mut features = Vec::with_capacity(self.features.len());
        for &i in perm.iter() {
            features.extend_from_slice(self.feature(i));
        }
        PointCloud {
            coords,
            features,
            feature_width: self.feature_width,
        }
    }
}

/// Storage order of a partitioned cloud: `perm[j]` is the original index of
/// the point stored at layout position `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutPermutation(Vec<usize>);

impl LayoutPermutation {
    /// Validates that `perm` is a bijection on `0..perm.len()`.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = alloc::vec![false; perm.len()];
        for (pos, &i) in perm.iter().enumerate() {
            if i >= perm.len() {
                bail!(Validation, "layout position {pos} holds out-of-range index {i}");
            }
            if core::mem::replace(&mut seen[i], true) {
                bail!(Validation, "index {i} appears twice in the layout");
            }
        }
        Ok(LayoutPermutation(perm))
    }

    pub(crate) fn from_vec_unchecked(perm: Vec<usize>) -> Self {
        debug_assert!(LayoutPermutation::new(perm.clone()).is_ok());
        LayoutPermutation(perm)
    }

    pub fn identity(n: usize) -> Self {
        LayoutPermutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, usize> {
        self.0.iter()
    }

    /// `inverse()[i]` is the layout position of original point `i`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = alloc::vec![0; self.0.len()];
        for (pos, &i) in self.0.iter().enumerate() {
            inv[i] = pos;
        }
        inv
    }
}

impl core::ops::Index<core::ops::Range<usize>> for LayoutPermutation {
    type Output = [usize];

    fn index(&self, range: core::ops::Range<usize>) -> &[usize] {
        &self.0[range]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(PointCloud::new(vec![]), Err(crate::Error::Validation(_))));
        let err = PointCloud::new(vec![[0.0, 0.0, f64::NAN]]).unwrap_err();
        assert!(matches!(err, crate::Error::Validation(_)));
        assert!(PointCloud::new(vec![[f64::INFINITY, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn feature_shape_is_checked() {
        assert!(PointCloud::with_features(vec![[0.0; 3]; 2], vec![1.0; 5], 3).is_err());
        let cloud = PointCloud::with_features(vec![[0.0; 3]; 2], vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(cloud.feature(1), &[3.0, 4.0]);
    }

    #[test]
    fn permutation_must_be_bijection() {
        assert!(LayoutPermutation::new(vec![2, 0, 1]).is_ok());
        assert!(LayoutPermutation::new(vec![0, 0, 1]).is_err());
        assert!(LayoutPermutation::new(vec![0, 3, 1]).is_err());
        let p = LayoutPermutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.inverse(), vec![1, 2, 0]);
    }
}
