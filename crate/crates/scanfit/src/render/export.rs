use std::path::Path;

use image::{ImageBuffer, Luma};

use super::{DepthMap, Mask, RenderError};

/// Encodes a 16-bit grayscale buffer to PNG in memory and writes it
/// atomically (temp file + rename), so partially written frames never
/// appear on disk.
fn write_png_atomic(
    img: ImageBuffer<Luma<u16>, Vec<u16>>,
    path: &Path,
) -> Result<(), RenderError> {
    let mut bytes = std::io::Cursor::new(Vec::new());
    img.write_to(&mut bytes, image::ImageFormat::Png)
        .map_err(|source| RenderError::ImageWrite {
            path: path.display().to_string(),
            source,
        })?;
    crate::ops::write_atomic(path, bytes.get_ref()).map_err(|e| RenderError::ImageWrite {
        path: path.display().to_string(),
        source: image::ImageError::IoError(e),
    })
}

/// Writes a depth map as 16-bit grayscale PNG. Units are `scale` meters per
/// count (1 mm when `scale` is 0.001); 0 encodes an invalid pixel; values
/// beyond the 16-bit range saturate.
pub fn save_depth_png(depth: &DepthMap, path: &Path, scale: f64) -> Result<(), RenderError> {
    let img = ImageBuffer::<Luma<u16>, Vec<u16>>::from_fn(
        depth.width as u32,
        depth.height as u32,
        |x, y| {
            let v = depth.get(x as usize, y as usize);
            if !DepthMap::is_valid_value(v) {
                return Luma([0u16]);
            }
            let q = (v / scale).round();
            Luma([q.clamp(0.0, 65535.0) as u16])
        },
    );
    write_png_atomic(img, path)
}

/// Reads a 16-bit grayscale PNG depth frame; counts convert to meters via
/// `scale`, with 0 meaning invalid.
pub fn load_depth_png(path: &Path, scale: f64) -> Result<DepthMap, RenderError> {
    let img = image::open(path).map_err(|source| RenderError::DepthRead {
        path: path.display().to_string(),
        source,
    })?;
    let gray = match img {
        image::DynamicImage::ImageLuma16(g) => g,
        _ => {
            return Err(RenderError::DepthFormat { path: path.display().to_string() });
        }
    };
    let (w, h) = gray.dimensions();
    let mut values = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let c = gray.get_pixel(x, y).0[0];
            values.push(if c == 0 { 0.0 } else { c as f64 * scale });
        }
    }
    Ok(DepthMap::from_values(w as usize, h as usize, values))
}

/// Writes a mask as 16-bit grayscale PNG (65535 inside, 0 outside).
pub fn save_mask_png(mask: &Mask, path: &Path) -> Result<(), RenderError> {
    let img = ImageBuffer::<Luma<u16>, Vec<u16>>::from_fn(
        mask.width as u32,
        mask.height as u32,
        |x, y| Luma([if mask.get(x as usize, y as usize) { 65535u16 } else { 0 }]),
    );
    write_png_atomic(img, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_round_trip_within_half_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let depth = DepthMap::from_values(3, 2, vec![0.0, 1.2345, 2.0, 0.0005, 65.0, 3.3333]);
        save_depth_png(&depth, &path, 0.001).unwrap();
        let back = load_depth_png(&path, 0.001).unwrap();
        assert_eq!(back.width, 3);
        assert_eq!(back.height, 2);
        for (i, (&a, &b)) in depth.values.iter().zip(&back.values).enumerate() {
            if DepthMap::is_valid_value(a) {
                assert!(
                    (a - b).abs() <= 0.0005 + 1e-12,
                    "pixel {i}: {a} vs {b} beyond quantization"
                );
            } else {
                assert_eq!(b, 0.0);
            }
        }
    }

    #[test]
    fn invalid_pixels_stay_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inv.png");
        let depth = DepthMap::new_invalid(4, 4);
        save_depth_png(&depth, &path, 0.001).unwrap();
        let back = load_depth_png(&path, 0.001).unwrap();
        assert_eq!(back.valid_count(), 0);
    }

    #[test]
    fn saturating_depths_clamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.png");
        let depth = DepthMap::from_values(1, 1, vec![1000.0]);
        save_depth_png(&depth, &path, 0.001).unwrap();
        let back = load_depth_png(&path, 0.001).unwrap();
        assert_eq!(back.values[0], 65.535);
    }

    #[test]
    fn mask_export_writes_binary_png() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut mask = Mask::new_empty(2, 2);
        mask.values[0] = true;
        mask.values[3] = true;
        save_mask_png(&mask, &path).unwrap();
        let img = image::open(&path).unwrap().into_luma16();
        assert_eq!(img.get_pixel(0, 0).0[0], 65535);
        assert_eq!(img.get_pixel(1, 0).0[0], 0);
        assert_eq!(img.get_pixel(1, 1).0[0], 65535);
    }
}
