//! Grayscale image grids, 8-bit file I/O and the four-class dataset layout.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("invalid grid shape {height}x{width} for {len} values")]
    InvalidShape {
        height: usize,
        width: usize,
        len: usize,
    },
    #[error("file not found: {}", path.display())]
    NotFound { path: PathBuf },
    #[error("failed to decode {}: {reason}", path.display())]
    Decode { path: PathBuf, reason: String },
    #[error("unsupported bit depth in {}: {color:?} (8-bit channels required)", path.display())]
    UnsupportedBitDepth {
        path: PathBuf,
        color: image::ColorType,
    },
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("failed to encode {}: {reason}", path.display())]
    Encode { path: PathBuf, reason: String },
    #[error("dataset root {} is missing the class directory for {missing}", root.display())]
    MissingClassDirectory { root: PathBuf, missing: ClassLabel },
    #[error("no decodable images under {}", root.display())]
    EmptyDataset { root: PathBuf },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A row-major grid of real intensities.
///
/// Loaded and normalized grids hold values in `[0, 1]`; intermediate results
/// (detail components, magnitudes) may hold any finite real.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self, ImageIoError> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(ImageIoError::InvalidShape {
                height,
                width,
                len: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Builds a grid from `f(row, col)`.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Applies `f` to every value, producing a new grid of the same shape.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two grids of the same shape.
    ///
    /// # Panics
    ///
    /// Panics on shape mismatch.
    pub fn zip_with(&self, other: &ImageGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "grid shape mismatch");
        Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &ImageGrid) -> f64 {
        assert_eq!(self.shape(), other.shape(), "grid shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Quantizes to 8 bits with round-half-up, clamping to `[0, 255]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Bilinear resampling with half-pixel centers (edges clamped).
    pub fn resize_bilinear(&self, height: usize, width: usize) -> ImageGrid {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        let max_r = (self.height - 1) as f64;
        let max_c = (self.width - 1) as f64;
        ImageGrid::from_fn(height, width, |r, c| {
            let y = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, max_r);
            let x = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, max_c);
            let (y0, x0) = (y.floor() as usize, x.floor() as usize);
            let (y1, x1) = ((y0 + 1).min(self.height - 1), (x0 + 1).min(self.width - 1));
            let (fy, fx) = (y - y0 as f64, x - x0 as f64);
            let top = self.get(y0, x0) * (1.0 - fx) + self.get(y0, x1) * fx;
            let bottom = self.get(y1, x0) * (1.0 - fx) + self.get(y1, x1) * fx;
            top * (1.0 - fy) + bottom * fy
        })
    }
}

/// `round(v * 255)` with halves rounded up, clamped to the byte range.
#[inline]
pub fn quantize(v: f64) -> u8 {
    let scaled = (v * 255.0 + 0.5).floor();
    if scaled.is_nan() {
        0
    } else {
        scaled.clamp(0.0, 255.0) as u8
    }
}

/// The four dementia stages, in canonical index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    NonDemented = 0,
    VeryMildDemented = 1,
    MildDemented = 2,
    ModerateDemented = 3,
}

impl ClassLabel {
    pub const COUNT: usize = 4;
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::NonDemented,
        ClassLabel::VeryMildDemented,
        ClassLabel::MildDemented,
        ClassLabel::ModerateDemented,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::NonDemented => "NonDemented",
            ClassLabel::VeryMildDemented => "VeryMildDemented",
            ClassLabel::MildDemented => "MildDemented",
            ClassLabel::ModerateDemented => "ModerateDemented",
        }
    }

    /// Matches a directory or column value against the canonical names,
    /// ignoring case, spaces, underscores and hyphens. Bare indices are
    /// accepted too.
    pub fn parse(text: &str) -> Option<Self> {
        let trimmed = text.trim();
        if let Ok(index) = trimmed.parse::<usize>() {
            return Self::from_index(index);
        }
        let key = normalize_name(trimmed);
        Self::ALL
            .into_iter()
            .find(|label| normalize_name(label.name()) == key)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: ClassLabel,
}

/// A candidate image file that failed to decode during a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

/// Labeled image list for one dataset split, sorted by path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub split: Split,
    pub entries: Vec<ManifestEntry>,
    /// Files with an image extension that did not decode. They are not part
    /// of `entries`; batch jobs report them as failures.
    pub skipped: Vec<SkippedFile>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label_counts(&self) -> [usize; ClassLabel::COUNT] {
        let mut counts = [0; ClassLabel::COUNT];
        for entry in &self.entries {
            counts[entry.label.index()] += 1;
        }
        counts
    }

    /// Writes `path,label_index,label_name` rows with LF line endings.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), ImageIoError> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        out.write_record(["path", "label_index", "label_name"])?;
        for entry in &self.entries {
            out.write_record([
                entry.path.to_string_lossy().as_ref(),
                &entry.label.index().to_string(),
                entry.label.name(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), ImageIoError> {
        let file = fs::File::create(path).map_err(|source| ImageIoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(io::BufWriter::new(file))
    }
}

fn open_image(path: &Path) -> Result<DynamicImage, ImageIoError> {
    let reader = ImageReader::open(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            ImageIoError::NotFound {
                path: path.to_path_buf(),
            }
        } else {
            ImageIoError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let reader = reader
        .with_guessed_format()
        .map_err(|source| ImageIoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    reader.decode().map_err(|e| ImageIoError::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[inline]
fn luminance(r: u8, g: u8, b: u8) -> f64 {
    if r == g && g == b {
        // Exact for gray pixels; the weights do not sum to 1 in binary.
        return r as f64 / 255.0;
    }
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0
}

/// Converts an 8-bit decoded image into a grid in `[0, 1]`.
pub fn grid_from_dynamic(img: &DynamicImage, path: &Path) -> Result<ImageGrid, ImageIoError> {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.as_raw().iter().map(|&v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
        other => {
            return Err(ImageIoError::UnsupportedBitDepth {
                path: path.to_path_buf(),
                color: other.color(),
            })
        }
    };
    ImageGrid::new(height, width, data).map_err(|_| ImageIoError::Decode {
        path: path.to_path_buf(),
        reason: "image has zero extent".into(),
    })
}

/// Loads a PNG or JPEG as a grayscale grid in `[0, 1]`.
///
/// Color inputs are reduced with BT.601 luma weights
/// (`0.299 R + 0.587 G + 0.114 B`); alpha is ignored.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<ImageGrid, ImageIoError> {
    let path = path.as_ref();
    let img = open_image(path)?;
    grid_from_dynamic(&img, path)
}

/// Writes an 8-bit grayscale PNG using [`quantize`].
pub fn save_grayscale(img: &ImageGrid, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let buf = GrayImage::from_raw(img.width() as u32, img.height() as u32, img.to_bytes())
        .expect("buffer length matches grid shape");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => ImageIoError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => ImageIoError::Encode {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ImageIoError + '_ {
    move |source| ImageIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Scans `root` for the four class directories and lists every decodable
/// image in them.
///
/// Directory names are matched ignoring case, spaces and underscores, so
/// `Mild_Demented`, `MildDemented` and `mild demented` all map to
/// [`ClassLabel::MildDemented`]. Only the direct children of each class
/// directory are considered.
pub fn scan_dataset(root: impl AsRef<Path>, split: Split) -> Result<DatasetManifest, ImageIoError> {
    let root = root.as_ref();
    let mut class_dirs: Vec<(PathBuf, ClassLabel)> = Vec::new();
    for item in fs::read_dir(root).map_err(io_err(root))? {
        let item = item.map_err(io_err(root))?;
        let path = item.path();
        if !path.is_dir() {
            continue;
        }
        let name = item.file_name();
        if let Some(label) = name.to_str().and_then(class_from_dir_name) {
            class_dirs.push((path, label));
        }
    }
    for label in ClassLabel::ALL {
        if !class_dirs.iter().any(|(_, l)| *l == label) {
            return Err(ImageIoError::MissingClassDirectory {
                root: root.to_path_buf(),
                missing: label,
            });
        }
    }

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (dir, label) in &class_dirs {
        for item in fs::read_dir(dir).map_err(io_err(dir))? {
            let path = item.map_err(io_err(dir))?.path();
            if !path.is_file() || !has_image_extension(&path) {
                continue;
            }
            match open_image(&path).and_then(|img| grid_from_dynamic(&img, &path)) {
                Ok(_) => entries.push(ManifestEntry {
                    path,
                    label: *label,
                }),
                Err(e) => skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                }),
            }
        }
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    skipped.sort_by(|a, b| a.path.cmp(&b.path));
    if entries.is_empty() {
        return Err(ImageIoError::EmptyDataset {
            root: root.to_path_buf(),
        });
    }
    Ok(DatasetManifest {
        root: root.to_path_buf(),
        split,
        entries,
        skipped,
    })
}

fn class_from_dir_name(name: &str) -> Option<ClassLabel> {
    // Bare indices are valid in CSV columns, not as directory names.
    if name.trim().parse::<usize>().is_ok() {
        return None;
    }
    ClassLabel::parse(name)
}
