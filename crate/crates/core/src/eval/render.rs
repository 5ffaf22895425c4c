use super::EvalError;
use crate::image::DEFAULT_PALETTE;
use crate::mofs::Semisegmentation;

/// RGB rendering of a segmentation: the owning object's color scaled by the
/// spel's grade. Spels owned by several objects take the lowest id's color.
pub fn render_connectedness(seg: &Semisegmentation, palette: &[[u8; 3]]) -> Result<image::RgbImage, EvalError> {
    if seg.objects() > palette.len() {
        return Err(EvalError::PaletteTooSmall { objects: seg.objects(), palette: palette.len() });
    }
    let (w, h) = (seg.width(), seg.height());
    Ok(::image::RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let c = y as usize * w + x as usize;
        let mask = seg.members(c);
        if mask == 0 {
            return ::image::Rgb([0, 0, 0]);
        }
        let base = palette[mask.trailing_zeros() as usize];
        let g = f64::from(seg.level(c)) / 1000.0;
        ::image::Rgb(base.map(|v| (f64::from(v) * g).round() as u8))
    }))
}

pub fn encode_rgb_png(img: &image::RgbImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, ::image::ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}

/// `n` distinct colors: [`DEFAULT_PALETTE`], then hues spaced by the golden angle.
pub fn palette(n: usize) -> Vec<[u8; 3]> {
    (0..n)
        .map(|i| {
            if i < DEFAULT_PALETTE.len() {
                return DEFAULT_PALETTE[i];
            }
            let hue = (i as f64 * 137.507_764) % 360.0;
            hsv_to_rgb(hue, 0.85, 1.0)
        })
        .collect()
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|t| ((t + m) * 255.0).round() as u8)
}
