use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// Row-major intensity raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data
            .iter()
            .find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::InvalidImage(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel. Values are clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y).clamp(0.0, 1.0))
            .collect();
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Applies `f` to every intensity, clamping the result into `[0, 1]`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v).clamp(0.0, 1.0)).collect(),
        }
    }

    pub fn to_luma8(&self) -> image::GrayImage {
        let bytes = self
            .data
            .iter()
            .map(|&v| (v * 255.0).round() as u8)
            .collect();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer length matches dimensions")
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_luma8()
            .save_with_format(path, ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::Io(io),
                other => Error::InvalidImage(other.to_string()),
            })
    }
}

/// Loads an 8-bit grayscale or RGB PNG / binary PGM. RGB is reduced to the
/// average of its three channels and 8-bit values are divided by 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let reader = ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => {
            return Err(Error::UnsupportedFormat(
                "unrecognized file signature".into(),
            ))
        }
    }
    let decoded = reader.decode().map_err(|e| unreadable(e.to_string()))?;
    from_dynamic(decoded)
}

pub fn from_dynamic(img: DynamicImage) -> Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension);
    }
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 255.0)
            .collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| rgb_average(p.0[0], p.0[1], p.0[2]))
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| rgb_average(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{:?} pixels (only 8-bit gray or RGB are accepted)",
                other.color()
            )))
        }
    };
    GrayImage::new(w, h, data)
}

fn rgb_average(r: u8, g: u8, b: u8) -> f64 {
    (r as f64 + g as f64 + b as f64) / (3.0 * 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_pgm(dir: &Path, name: &str, w: usize, h: usize, px: &[u8]) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        write!(f, "P5\n{w} {h}\n255\n").unwrap();
        f.write_all(px).unwrap();
        path
    }

    #[test]
    fn single_white_pgm_pixel_normalizes_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_pgm(dir.path(), "one.pgm", 1, 1, &[255]);
        let img = load_image(&p).unwrap();
        assert_eq!(img.dims(), (1, 1));
        assert_eq!(img.data(), &[1.0]);
    }

    #[test]
    fn pgm_is_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_pgm(dir.path(), "quad.pgm", 2, 2, &[0, 255, 255, 0]);
        let img = load_image(&p).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn truncated_png_is_unreadable() {
        let dir = tempfile::tempdir().unwrap();
        let src = GrayImage::from_fn(16, 16, |x, y| ((x + y) % 7) as f64 / 7.0).unwrap();
        let full = dir.path().join("full.png");
        src.save_png(&full).unwrap();
        let bytes = std::fs::read(&full).unwrap();
        let cut = dir.path().join("cut.png");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        let err = load_image(&cut).unwrap_err();
        assert!(err.to_string().starts_with("unreadable file"), "{err}");
    }

    #[test]
    fn missing_file_and_foreign_format_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_image(dir.path().join("nope.png")),
            Err(Error::UnreadableFile { .. })
        ));
        let gif = dir.path().join("x.gif");
        std::fs::write(&gif, b"GIF89a\x01\x00\x01\x00\x00\x00\x00;").unwrap();
        assert!(matches!(load_image(&gif), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn rgb_png_is_channel_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let buf = image::RgbImage::from_raw(2, 1, vec![255, 0, 0, 30, 60, 90]).unwrap();
        buf.save(&path).unwrap();
        let img = load_image(&path).unwrap();
        assert!((img.get(0, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((img.get(1, 0) - 60.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn png_round_trip_preserves_8bit_levels() {
        let dir = tempfile::tempdir().unwrap();
        let src = GrayImage::from_fn(5, 3, |x, y| (x * 40 + y * 7) as f64 / 255.0).unwrap();
        let path = dir.path().join("rt.png");
        src.save_png(&path).unwrap();
        let back = load_image(&path).unwrap();
        for (a, b) in src.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_bad_data() {
        assert!(matches!(
            GrayImage::new(0, 3, vec![]),
            Err(Error::ZeroDimension)
        ));
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
    }
}
