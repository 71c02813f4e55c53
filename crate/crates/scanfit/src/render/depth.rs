use super::RenderError;

/// A row-major grid of camera-space depths in meters. A value ≤ 0 or
/// non-finite means the pixel carries no measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl DepthMap {
    /// An all-invalid map (every pixel 0).
    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self { width, height, values: vec![0.0; width * height] }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "depth grid size mismatch");
        Self { width, height, values }
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.idx(x, y)]
    }

    /// The validity convention used everywhere: strictly positive and finite.
    #[inline]
    pub fn is_valid_value(v: f64) -> bool {
        v > 0.0 && v.is_finite()
    }

    #[inline]
    pub fn valid_at(&self, x: usize, y: usize) -> bool {
        Self::is_valid_value(self.get(x, y))
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| Self::is_valid_value(v)).count()
    }

    pub fn same_dims(&self, other: &DepthMap) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// A binary image mask with the same indexing as [`DepthMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub values: Vec<bool>,
}

impl Mask {
    pub fn new_empty(width: usize, height: usize) -> Self {
        Self { width, height, values: vec![false; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.values.iter().any(|&b| b)
    }
}

/// Per-pixel minimum over valid entries; a pixel is invalid in the output
/// only where both inputs are invalid. Fusing the renders of two mesh sets
/// equals rendering their union in one pass, bit for bit.
pub fn fuse_depth(a: &DepthMap, b: &DepthMap) -> Result<DepthMap, RenderError> {
    if !a.same_dims(b) {
        return Err(RenderError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&va, &vb)| {
            match (DepthMap::is_valid_value(va), DepthMap::is_valid_value(vb)) {
                (true, true) => va.min(vb),
                (true, false) => va,
                (false, true) => vb,
                (false, false) => 0.0,
            }
        })
        .collect();
    Ok(DepthMap { width: a.width, height: a.height, values })
}
