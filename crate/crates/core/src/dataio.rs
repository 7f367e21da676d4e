//! Dataset ingestion (grayscale image directories and binary feature files),
//! stratified splitting, and synthetic data generators.
//!
//! Feature file layout, little-endian throughout:
//!
//! ```text
//! "DCFV1\0"                       6-byte magic
//! u32 n, u32 d, u32 C
//! C × (u16 byte length, UTF-8 class name)
//! n × (u32 class index, d × f64)
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, FormatError, Result};
use crate::linalg::Matrix;
use crate::model::SampleMode;
use crate::wire::{Reader, Writer};

pub const FEATURE_MAGIC: &[u8; 6] = b"DCFV1\0";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Matrix>,
    labels: Vec<String>,
    classes: Vec<String>,
    mode: SampleMode,
}

impl Dataset {
    /// `classes` is the ordered label vocabulary; every label must be in it.
    pub fn new(samples: Vec<Matrix>, labels: Vec<String>, classes: Vec<String>, mode: SampleMode) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("a dataset needs at least one sample".into()));
        }
        if samples.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        let shape = samples[0].shape();
        if let Some(j) = samples.iter().position(|s| s.shape() != shape) {
            return Err(Error::InvalidInput(format!(
                "sample {j} is {:?}, sample 0 is {:?}",
                samples[j].shape(),
                shape
            )));
        }
        if mode == SampleMode::Feature1D && shape.1 != 1 {
            return Err(Error::InvalidInput("feature samples must be column vectors".into()));
        }
        if let Some(l) = labels.iter().find(|l| !classes.contains(l)) {
            return Err(Error::InvalidInput(format!("label {l:?} is not a known class")));
        }
        Ok(Self {
            samples,
            labels,
            classes,
            mode,
        })
    }

    pub fn samples(&self) -> &[Matrix] {
        &self.samples
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(rows, cols)` shared by every sample.
    pub fn sample_shape(&self) -> (usize, usize) {
        self.samples[0].shape()
    }

    /// Classes that actually occur, in vocabulary order.
    pub fn present_classes(&self) -> Vec<String> {
        self.classes
            .iter()
            .filter(|c| self.labels.contains(c))
            .cloned()
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        Dataset::new(samples, labels, self.classes.clone(), self.mode)
    }

    fn indices_by_class(&self) -> Vec<(String, Vec<usize>)> {
        self.classes
            .iter()
            .map(|c| {
                let idx = (0..self.len()).filter(|&i| &self.labels[i] == c).collect();
                (c.clone(), idx)
            })
            .filter(|(_, idx): &(String, Vec<usize>)| !idx.is_empty())
            .collect()
    }
}

fn data_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("pgm") | Some("png")
    )
}

/// Reads one 8-bit grayscale PGM or PNG, scaled to `[0, 1]`.
pub fn load_image(path: &Path) -> Result<Matrix> {
    let img = image::open(path).map_err(|e| data_err(path, format!("unreadable image: {e}")))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(data_err(
                path,
                format!("expected 8-bit grayscale, got {:?}", other.color()),
            ))
        }
    };
    let (w, h) = gray.dimensions();
    let data = gray.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
    Matrix::new(h as usize, w as usize, data).map_err(|e| data_err(path, e.to_string()))
}

/// Loads `root/<class>/<image>` files. Class names are the subdirectory
/// names; classes and files are visited in lexicographic order. When
/// `expected` is `None` the first image fixes the shape.
pub fn load_image_dir(root: &Path, expected: Option<(usize, usize)>) -> Result<Dataset> {
    let mut expected = expected;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut classes = Vec::new();
    for class_dir in sorted_entries(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let class = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| data_err(&class_dir, "class directory name is not UTF-8"))?
            .to_string();
        let mut any = false;
        for file in sorted_entries(&class_dir)? {
            if !file.is_file() || !is_image_file(&file) {
                continue;
            }
            let img = load_image(&file)?;
            match expected {
                Some(shape) if shape != img.shape() => {
                    return Err(data_err(
                        &file,
                        format!(
                            "image is {}x{}, expected {}x{}",
                            img.rows(),
                            img.cols(),
                            shape.0,
                            shape.1
                        ),
                    ))
                }
                Some(_) => {}
                None => expected = Some(img.shape()),
            }
            samples.push(img);
            labels.push(class.clone());
            any = true;
        }
        if any {
            classes.push(class);
        }
    }
    if samples.is_empty() {
        return Err(data_err(root, "no class subdirectories with PGM/PNG images"));
    }
    Dataset::new(samples, labels, classes, SampleMode::Image2D)
}

/// Writes a binary (P5) PGM; values are clamped to `[0, 1]` and quantized.
pub fn write_pgm(path: &Path, sample: &Matrix) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", sample.cols(), sample.rows()).into_bytes();
    bytes.extend(
        sample
            .as_slice()
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes every sample under `root/<class>/<index>.pgm`.
pub fn write_image_dir(root: &Path, ds: &Dataset) -> Result<()> {
    for class in ds.classes() {
        let dir = root.join(class);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    for (i, (s, l)) in ds.samples().iter().zip(ds.labels()).enumerate() {
        write_pgm(&root.join(l).join(format!("{i:06}.pgm")), s)?;
    }
    Ok(())
}

pub fn encode_feature_file(ds: &Dataset) -> Result<Vec<u8>> {
    let (d, cols) = ds.sample_shape();
    if cols != 1 && ds.mode() == SampleMode::Feature1D {
        return Err(Error::InvalidInput("feature samples must be column vectors".into()));
    }
    let d = d * cols;
    let mut w = Writer::default();
    w.bytes(FEATURE_MAGIC);
    w.u32(ds.len() as u32);
    w.u32(d as u32);
    w.u32(ds.classes().len() as u32);
    for c in ds.classes() {
        w.string(c)?;
    }
    for (s, l) in ds.samples().iter().zip(ds.labels()) {
        let idx = ds.classes().iter().position(|c| c == l).expect("validated label");
        w.u32(idx as u32);
        w.f64s(s.as_slice());
    }
    Ok(w.into_bytes())
}

/// Writes the feature file format; image samples are flattened row-major.
pub fn write_feature_file(path: &Path, ds: &Dataset) -> Result<()> {
    let bytes = encode_feature_file(ds)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn decode_feature_file(path: &Path, bytes: &[u8]) -> Result<Dataset> {
    let fmt = |k| Error::format(path, k);
    if bytes.len() < FEATURE_MAGIC.len() || &bytes[..FEATURE_MAGIC.len()] != FEATURE_MAGIC {
        return Err(fmt(FormatError::NotAFeatureFile));
    }
    let mut r = Reader::new(&bytes[FEATURE_MAGIC.len()..]);
    let truncated = |_| fmt(FormatError::Truncated);
    let n = r.u32().map_err(truncated)?;
    let d = r.u32().map_err(truncated)?;
    let c = r.u32().map_err(truncated)?;
    if n == 0 {
        return Err(fmt(FormatError::Inconsistent("file has no records".into())));
    }
    if d == 0 || c == 0 {
        return Err(fmt(FormatError::Inconsistent(format!(
            "dimension {d} and class count {c} must be positive"
        ))));
    }
    let mut classes = Vec::with_capacity(c as usize);
    for _ in 0..c {
        classes.push(r.string().map_err(|e| match e {
            crate::wire::WireError::Utf8 => fmt(FormatError::Inconsistent("class name is not UTF-8".into())),
            crate::wire::WireError::Truncated => fmt(FormatError::Truncated),
        })?);
    }
    let record_len = 4 + 8 * d as usize;
    if r.remaining() < record_len.saturating_mul(n as usize) {
        return Err(fmt(FormatError::Truncated));
    }
    let mut samples = Vec::with_capacity(n as usize);
    let mut labels = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let idx = r.u32().map_err(truncated)?;
        if idx >= c {
            return Err(fmt(FormatError::LabelOutOfRange { index: idx, classes: c }));
        }
        let values = r.f64s(d as usize).map_err(truncated)?;
        let sample = Matrix::column(values).map_err(|e| data_err(path, e.to_string()))?;
        samples.push(sample);
        labels.push(classes[idx as usize].clone());
    }
    if r.remaining() != 0 {
        return Err(fmt(FormatError::TrailingBytes));
    }
    Dataset::new(samples, labels, classes, SampleMode::Feature1D).map_err(|e| data_err(path, e.to_string()))
}

pub fn load_feature_file(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_feature_file(path, &bytes)
}

/// Training share of each class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    PerClass(usize),
    /// Rounded share of each class, e.g. `0.5` for half.
    Fraction(f64),
}

impl SplitSpec {
    fn train_count(&self, class: &str, available: usize) -> Result<usize> {
        let k = match *self {
            SplitSpec::PerClass(k) => k,
            SplitSpec::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "train fraction must lie strictly between 0 and 1, got {f}"
                    )));
                }
                ((available as f64) * f).round() as usize
            }
        };
        if k == 0 || k >= available {
            return Err(Error::InvalidInput(format!(
                "class {class:?} has {available} samples, cannot take {k} for training and keep a test sample"
            )));
        }
        Ok(k)
    }
}

/// Seeded per-class sampling without replacement. Both halves keep the
/// original sample order.
pub fn split(ds: &Dataset, spec: SplitSpec, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_mask = vec![false; ds.len()];
    for (class, mut idx) in ds.indices_by_class() {
        let k = spec.train_count(&class, idx.len())?;
        idx.shuffle(&mut rng);
        for &i in &idx[..k] {
            train_mask[i] = true;
        }
    }
    let train: Vec<usize> = (0..ds.len()).filter(|&i| train_mask[i]).collect();
    let test: Vec<usize> = (0..ds.len()).filter(|&i| !train_mask[i]).collect();
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

/// Stratified assignment of sample indices to `folds` folds. Each class is
/// shuffled and dealt round-robin, so fold sizes per class differ by at most
/// one.
pub fn stratified_folds(ds: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for (class, mut idx) in ds.indices_by_class() {
        if idx.len() < folds {
            return Err(Error::InvalidInput(format!(
                "class {class:?} has {} samples, fewer than {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            out[next % folds].push(i);
            next += 1;
        }
    }
    for f in out.iter_mut() {
        f.sort_unstable();
    }
    Ok(out)
}

/// Synthetic datasets for tests, demos and shape checks.
pub mod synth {
    use super::*;

    /// Two classes, `horizontal` and `vertical`, of binary stripe images
    /// with additive Gaussian noise, clamped to `[0, 1]`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct StripeConfig {
        pub rows: usize,
        pub cols: usize,
        pub per_class: usize,
        pub noise: f64,
        /// Stripe period in pixels; half of each period is lit.
        pub period: usize,
    }

    impl Default for StripeConfig {
        fn default() -> Self {
            Self {
                rows: 16,
                cols: 16,
                per_class: 100,
                noise: 0.1,
                period: 4,
            }
        }
    }

    pub const STRIPE_CLASSES: [&str; 2] = ["horizontal", "vertical"];

    pub fn stripes(cfg: &StripeConfig, seed: u64) -> Result<Dataset> {
        if cfg.rows == 0 || cfg.cols == 0 || cfg.per_class == 0 || cfg.period < 2 {
            return Err(Error::InvalidInput(format!("invalid stripe configuration {cfg:?}")));
        }
        let noise = Normal::new(0.0, cfg.noise)
            .map_err(|e| Error::InvalidInput(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lit = |i: usize| if i % cfg.period < cfg.period / 2 { 1.0 } else { 0.0 };
        let mut samples = Vec::with_capacity(2 * cfg.per_class);
        let mut labels = Vec::with_capacity(2 * cfg.per_class);
        for (class, name) in STRIPE_CLASSES.iter().enumerate() {
            for _ in 0..cfg.per_class {
                let img = Matrix::from_fn(cfg.rows, cfg.cols, |r, c| {
                    let base = if class == 0 { lit(r) } else { lit(c) };
                    (base + noise.sample(&mut rng)).clamp(0.0, 1.0)
                });
                samples.push(img);
                labels.push(name.to_string());
            }
        }
        let classes = STRIPE_CLASSES.iter().map(|s| s.to_string()).collect();
        Dataset::new(samples, labels, classes, SampleMode::Image2D)
    }

    /// `classes` random templates in `[0, 1]`, each sampled `per_class`
    /// times with additive Gaussian noise and clamped to `[0, 1]`.
    /// Feature mode produces `rows × 1` column vectors.
    pub fn templates(
        rows: usize,
        cols: usize,
        classes: usize,
        per_class: usize,
        noise: f64,
        mode: SampleMode,
        seed: u64,
    ) -> Result<Dataset> {
        if mode == SampleMode::Feature1D && cols != 1 {
            return Err(Error::InvalidInput("feature templates must have one column".into()));
        }
        if rows == 0 || cols == 0 || classes == 0 || per_class == 0 {
            return Err(Error::InvalidInput("template dataset dimensions must be positive".into()));
        }
        let noise = Normal::new(0.0, noise).map_err(|e| Error::InvalidInput(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let uniform = rand_distr::Uniform::new(0.0, 1.0).expect("valid range");
        let names: Vec<String> = (0..classes).map(|c| format!("class{c:03}")).collect();
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for name in &names {
            let template = Matrix::from_fn(rows, cols, |_, _| uniform.sample(&mut rng));
            for _ in 0..per_class {
                samples.push(Matrix::from_fn(rows, cols, |r, c| {
                    (template.get(r, c) + noise.sample(&mut rng)).clamp(0.0, 1.0)
                }));
                labels.push(name.clone());
            }
        }
        Dataset::new(samples, labels, names, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn toy(counts: &[usize]) -> Dataset {
        let classes: Vec<String> = (0..counts.len()).map(|c| format!("c{c}")).collect();
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        let mut id = 0.0;
        for (c, &k) in counts.iter().enumerate() {
            for _ in 0..k {
                samples.push(Matrix::column(vec![id, 1.0]).unwrap());
                labels.push(classes[c].clone());
                id += 1.0;
            }
        }
        Dataset::new(samples, labels, classes, SampleMode::Feature1D).unwrap()
    }

    #[test]
    fn image_dir_loading() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir_all(root.join("a")).unwrap();
        fs::create_dir_all(root.join("b")).unwrap();
        write_pgm(&root.join("a/2.pgm"), &Matrix::zeros(3, 2)).unwrap();
        write_pgm(&root.join("a/1.pgm"), &Matrix::from_fn(3, 2, |_, _| 1.0)).unwrap();
        image::GrayImage::from_raw(2, 3, vec![0, 51, 102, 153, 204, 255])
            .unwrap()
            .save(root.join("b/x.png"))
            .unwrap();
        fs::write(root.join("b/notes.txt"), "ignored").unwrap();
        let ds = load_image_dir(root, Some((3, 2))).unwrap();
        assert_eq!(ds.labels(), &names(&["a", "a", "b"]));
        assert!(ds.samples()[0].as_slice().iter().all(|&v| v == 1.0));
        assert!(ds.samples()[1].as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(ds.samples()[2].as_slice(), &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert!(ds.samples().iter().flat_map(|s| s.as_slice()).all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(load_image_dir(root, None).unwrap(), ds);

        let err = load_image_dir(root, Some((2, 3))).unwrap_err();
        assert!(err.to_string().contains("1.pgm"), "{err}");
        fs::write(root.join("b/y.pgm"), b"garbage").unwrap();
        let err = load_image_dir(root, None).unwrap_err();
        assert!(err.to_string().contains("y.pgm"), "{err}");
    }

    #[test]
    fn rgb_png_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("a")).unwrap();
        image::RgbImage::new(2, 2).save(dir.path().join("a/c.png")).unwrap();
        assert!(load_image_dir(dir.path(), None).is_err());
    }

    #[test]
    fn feature_file_roundtrip() {
        let ds = toy(&[1, 1]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        write_feature_file(&path, &ds).unwrap();
        let back = load_feature_file(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.sample_shape(), (2, 1));
        assert_eq!(back, ds);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(encode_feature_file(&back).unwrap(), bytes);
    }

    #[test]
    fn feature_file_errors() {
        let ds = toy(&[2, 1]);
        let bytes = encode_feature_file(&ds).unwrap();
        let p = Path::new("mem");
        let kind = |b: &[u8]| match decode_feature_file(p, b) {
            Err(Error::Format { kind, .. }) => kind,
            other => panic!("expected format error, got {other:?}"),
        };
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(kind(&bad), FormatError::NotAFeatureFile);
        assert_eq!(kind(&bytes[..bytes.len() - 3]), FormatError::Truncated);
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(kind(&extra), FormatError::TrailingBytes);
        // first record's class index sits right after the header and names
        let header = 6 + 12 + (2 + 2) * 2;
        let mut oob = bytes.clone();
        oob[header..header + 4].copy_from_slice(&7u32.to_le_bytes());
        assert_eq!(kind(&oob), FormatError::LabelOutOfRange { index: 7, classes: 2 });
        let mut empty = bytes[..header].to_vec();
        empty[6..10].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(kind(&empty), FormatError::Inconsistent(_)));
    }

    #[test]
    fn split_counts_and_partition() {
        let ds = toy(&[4, 6]);
        let (train, test) = split(&ds, SplitSpec::PerClass(2), 3).unwrap();
        assert_eq!(train.len(), 4);
        assert_eq!(test.len(), 6);
        let mut ids: Vec<f64> = train
            .samples()
            .iter()
            .chain(test.samples())
            .map(|s| s.get(0, 0))
            .collect();
        ids.sort_by(f64::total_cmp);
        assert_eq!(ids, (0..10).map(|v| v as f64).collect::<Vec<_>>());
        let (half, _) = split(&ds, SplitSpec::Fraction(0.5), 3).unwrap();
        assert_eq!(half.labels().iter().filter(|l| *l == "c0").count(), 2);
        assert_eq!(half.labels().iter().filter(|l| *l == "c1").count(), 3);
    }

    #[test]
    fn split_determinism() {
        let ds = toy(&[20, 20]);
        let a = split(&ds, SplitSpec::PerClass(10), 1).unwrap();
        let b = split(&ds, SplitSpec::PerClass(10), 1).unwrap();
        let c = split(&ds, SplitSpec::PerClass(10), 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn split_rejects_small_class() {
        let ds = toy(&[4, 2]);
        let err = split(&ds, SplitSpec::PerClass(2), 0).unwrap_err();
        assert!(err.to_string().contains("c1"));
    }

    #[test]
    fn folds_are_stratified_partitions() {
        let ds = toy(&[10, 7]);
        let folds = stratified_folds(&ds, 3, 5).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..17).collect::<Vec<_>>());
        for f in &folds {
            assert!(f.iter().any(|&i| ds.labels()[i] == "c0"));
            assert!(f.iter().any(|&i| ds.labels()[i] == "c1"));
        }
        assert!(stratified_folds(&ds, 1, 0).is_err());
        assert!(stratified_folds(&ds, 8, 0).is_err());
    }

    #[test]
    fn stripes_shape_and_range() {
        let ds = synth::stripes(&synth::StripeConfig { per_class: 3, ..Default::default() }, 1).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.sample_shape(), (16, 16));
        assert!(ds.samples().iter().flat_map(|s| s.as_slice()).all(|&v| (0.0..=1.0).contains(&v)));
        let clean = synth::stripes(&synth::StripeConfig { per_class: 1, noise: 0.0, ..Default::default() }, 1).unwrap();
        assert_eq!(clean.samples()[0].row(0), &[1.0; 16]);
        assert_eq!(clean.samples()[0].row(2), &[0.0; 16]);
        assert_eq!(clean.samples()[1].get(5, 0), 1.0);
        assert_eq!(clean.samples()[1].get(5, 2), 0.0);
    }
}
