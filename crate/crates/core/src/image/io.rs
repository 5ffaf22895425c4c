use super::{GrayImage, ImageError};
use image::{DynamicImage, ImageFormat, ImageReader};
use std::io::Cursor;
use std::path::Path;

/// Loads an 8-bit grayscale PGM (P2/P5) or PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|source| ImageError::Io { path: path.to_path_buf(), source })?;
    decode_image(&bytes)
}

/// Decodes an in-memory PGM or PNG. Anything but 8-bit single-channel data is rejected.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| ImageError::UnsupportedFormat(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        other => {
            return Err(ImageError::UnsupportedFormat(format!(
                "expected PNG or PGM, found {other:?}"
            )))
        }
    }
    let decoded = reader.decode().map_err(|e| ImageError::UnsupportedFormat(e.to_string()))?;
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            GrayImage::from_levels(w as usize, h as usize, buf.as_raw())
        }
        other => Err(ImageError::UnsupportedFormat(format!(
            "expected 8-bit grayscale, found {:?}",
            other.color()
        ))),
    }
}

/// Encodes the image as an 8-bit grayscale PNG.
pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.levels())
        .expect("buffer matches dimensions");
    let mut out = Vec::new();
    buf.write_to(&mut Cursor::new(&mut out), ImageFormat::Png).expect("in-memory PNG encoding");
    out
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    std::fs::write(path, encode_png(img))
        .map_err(|source| ImageError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pgm_scales_to_unit_range() {
        let pgm = b"P2\n2 2\n255\n0 255\n0 255\n";
        let img = decode_image(pgm).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn binary_pgm_is_accepted() {
        let mut pgm = b"P5\n3 1\n255\n".to_vec();
        pgm.extend_from_slice(&[0, 51, 255]);
        let img = decode_image(&pgm).unwrap();
        assert_eq!(img.width(), 3);
        assert!((img.data()[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn png_round_trip_is_exact() {
        let levels: Vec<u8> = (0..=255u8).collect();
        let img = GrayImage::from_levels(16, 16, &levels).unwrap();
        let back = decode_image(&encode_png(&img)).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = GrayImage::from_fn(7, 5, |x, y| ((x * 31 + y * 17) % 256) as f64 / 255.0);
        save_png(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn rgb_png_is_rejected() {
        let rgb = image::RgbImage::from_pixel(4, 4, image::Rgb([10, 20, 30]));
        let mut bytes = Vec::new();
        rgb.write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png).unwrap();
        assert!(matches!(decode_image(&bytes), Err(ImageError::UnsupportedFormat(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_image("/nonexistent/x.png"), Err(ImageError::Io { .. })));
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(matches!(decode_image(b"hello"), Err(ImageError::UnsupportedFormat(_))));
    }
}
