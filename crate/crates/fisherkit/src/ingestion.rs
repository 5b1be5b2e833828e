//! Gallery loading: binary PGM parsing, directory-per-class datasets, and
//! assembly of the images-as-columns data matrix.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// One grayscale image flattened to a column vector.
///
/// Vectorization is column-major: all of image column 0 top to bottom,
/// then column 1, and so on. Pixels are normalized to [0, 1].
#[derive(Debug, Clone)]
pub struct ImageVector {
    pub pixels: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub source_path: PathBuf,
}

/// A class-labeled training set of same-sized images.
#[derive(Debug, Clone)]
pub struct LabeledGallery {
    pub images: Vec<ImageVector>,
    /// Per-image index into `class_names`.
    pub labels: Vec<usize>,
    /// Distinct class identifiers, sorted by name.
    pub class_names: Vec<String>,
    pub width: usize,
    pub height: usize,
}

impl LabeledGallery {
    pub fn image_count(&self) -> usize {
        self.images.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }
}

fn read_header_token(
    bytes: &[u8],
    pos: &mut usize,
    path: &Path,
) -> Result<String> {
    // skip whitespace and '#' comments between tokens
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::PgmBadHeader {
            path: path.to_path_buf(),
            detail: "unexpected end of header".into(),
        });
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_number(token: &str, what: &str, path: &Path) -> Result<u32> {
    token.parse().map_err(|_| Error::PgmBadHeader {
        path: path.to_path_buf(),
        detail: format!("{what} is not a number: {token:?}"),
    })
}

/// Loads a binary (P5) PGM file, normalizing pixels to [0, 1].
pub fn load_pgm(path: impl AsRef<Path>) -> Result<ImageVector> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::PgmBadMagic {
            path: path.to_path_buf(),
            found,
        });
    }
    let mut pos = 2;
    let width = parse_header_number(&read_header_token(&bytes, &mut pos, path)?, "width", path)?;
    let height = parse_header_number(&read_header_token(&bytes, &mut pos, path)?, "height", path)?;
    let maxval = parse_header_number(&read_header_token(&bytes, &mut pos, path)?, "maxval", path)?;
    if maxval > 255 {
        return Err(Error::PgmMaxvalTooLarge {
            path: path.to_path_buf(),
            maxval,
        });
    }
    if maxval == 0 || width == 0 || height == 0 {
        return Err(Error::PgmBadHeader {
            path: path.to_path_buf(),
            detail: format!("width, height and maxval must be positive (got {width}x{height}, maxval {maxval})"),
        });
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;

    let width = width as usize;
    let height = height as usize;
    let expected = width * height;
    let raster = &bytes[pos.min(bytes.len())..];
    if raster.len() < expected {
        return Err(Error::PgmTruncated {
            path: path.to_path_buf(),
            expected,
            actual: raster.len(),
        });
    }

    // File raster is row-major; our vectorization is column-major.
    let maxval = maxval as f64;
    let mut pixels = vec![0.0; expected];
    for row in 0..height {
        for col in 0..width {
            pixels[col * height + row] = raster[row * width + col] as f64 / maxval;
        }
    }
    Ok(ImageVector {
        pixels,
        width,
        height,
        source_path: path.to_path_buf(),
    })
}

/// Writes an ImageVector back out as an 8-bit binary PGM with maxval 255.
pub fn write_pgm(image: &ImageVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(32 + image.width * image.height);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", image.width, image.height).as_bytes());
    for row in 0..image.height {
        for col in 0..image.width {
            let v = image.pixels[col * image.height + row];
            out.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads a gallery from a directory tree with one subdirectory per class.
///
/// Traversal is deterministic: classes sorted by name, images sorted by
/// filename within each class.
pub fn load_gallery(root_dir: impl AsRef<Path>) -> Result<LabeledGallery> {
    let root = root_dir.as_ref();
    let mut class_dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();

    if class_dirs.len() < 2 {
        return Err(Error::TooFewClasses {
            root: root.to_path_buf(),
            found: class_dirs.len(),
        });
    }

    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut class_names = Vec::new();
    let mut dims: Option<(usize, usize)> = None;

    for (class_idx, dir) in class_dirs.iter().enumerate() {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .map(|ext| ext.eq_ignore_ascii_case("pgm"))
                        .unwrap_or(false)
            })
            .collect();
        files.sort();

        if files.len() < 2 {
            return Err(Error::TooFewImages {
                class: dir.clone(),
                found: files.len(),
            });
        }

        for file in &files {
            let image = load_pgm(file)?;
            match dims {
                None => dims = Some((image.width, image.height)),
                Some((w, h)) => {
                    if image.width != w || image.height != h {
                        return Err(Error::HeterogeneousDimensions {
                            path: file.clone(),
                            width: image.width,
                            height: image.height,
                            expected_width: w,
                            expected_height: h,
                        });
                    }
                }
            }
            images.push(image);
            labels.push(class_idx);
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        class_names.push(name);
    }

    let (width, height) = dims.expect("at least 2 classes with images each");
    Ok(LabeledGallery {
        images,
        labels,
        class_names,
        width,
        height,
    })
}

/// Stacks the gallery's images as columns of an N x p matrix.
pub fn data_matrix(gallery: &LabeledGallery) -> Matrix {
    let n = gallery.width * gallery.height;
    let p = gallery.images.len();
    let mut data = Vec::with_capacity(n * p);
    for image in &gallery.images {
        data.extend_from_slice(&image.pixels);
    }
    Matrix::from_column_major(n, p, data).expect("gallery invariants guarantee a valid matrix")
}
