use super::ImageError;
use std::io::Cursor;
use std::path::Path;

/// Distinct object colors; entry `m - 1` is the color of object `m`.
pub const DEFAULT_PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

/// Per-pixel object ids; `0` means unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(ImageError::InvalidDimensions { width, height, len: labels.len() });
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, label: u8) -> Self {
        Self { width, height, labels: vec![label; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let labels = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y));
        Self { width, height, labels: labels.collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        self.labels[y * self.width + x] = label;
    }

    /// Largest label present.
    pub fn max_label(&self) -> u8 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Sorted distinct non-zero labels.
    pub fn objects(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (1..=255u8).filter(|&l| seen[l as usize]).collect()
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Applies `map[old] = new` to every pixel.
    pub fn relabeled(&self, map: &[u8; 256]) -> LabelMap {
        LabelMap {
            width: self.width,
            height: self.height,
            labels: self.labels.iter().map(|&l| map[l as usize]).collect(),
        }
    }

    /// Indexed PNG whose palette indices are the object ids.
    pub fn encode_png(&self) -> Vec<u8> {
        let mut palette = vec![0u8; 3];
        for m in 1..=self.max_label().max(1) as usize {
            palette.extend_from_slice(&DEFAULT_PALETTE[(m - 1) % DEFAULT_PALETTE.len()]);
        }
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Indexed);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_palette(palette);
            let mut writer = enc.write_header().expect("in-memory PNG header");
            writer.write_image_data(&self.labels).expect("in-memory PNG data");
        }
        out
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_png())
            .map_err(|source| ImageError::Io { path: path.to_path_buf(), source })
    }

    /// Reads an indexed PNG (indices are labels) or an 8-bit grayscale PNG
    /// (gray levels are labels).
    pub fn decode_png(bytes: &[u8]) -> Result<LabelMap, ImageError> {
        let bad = |e: png::DecodingError| ImageError::UnsupportedFormat(e.to_string());
        let mut dec = png::Decoder::new(Cursor::new(bytes));
        dec.set_transformations(png::Transformations::IDENTITY);
        let mut reader = dec.read_info().map_err(bad)?;
        let (color, depth) = reader.output_color_type();
        if depth != png::BitDepth::Eight
            || !matches!(color, png::ColorType::Indexed | png::ColorType::Grayscale)
        {
            return Err(ImageError::UnsupportedFormat(format!(
                "label maps must be 8-bit indexed or grayscale, found {color:?} {depth:?}"
            )));
        }
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| ImageError::UnsupportedFormat("label map too large".into()))?;
        let mut buf = vec![0u8; size];
        let info = reader.next_frame(&mut buf).map_err(bad)?;
        let (w, h) = (info.width as usize, info.height as usize);
        let mut labels = Vec::with_capacity(w * h);
        for row in buf.chunks(info.line_size).take(h) {
            labels.extend_from_slice(&row[..w]);
        }
        LabelMap::new(w, h, labels)
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<LabelMap, ImageError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|source| ImageError::Io { path: path.to_path_buf(), source })?;
        Self::decode_png(&bytes)
    }
}
