//! Learned artifacts, hyperparameters and label encoding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::patching::ConvGeometry;

/// Slack allowed on the unit-ball atom constraint.
pub const ATOM_NORM_SLACK: f64 = 1e-12;

/// How samples are shaped: 2-D grayscale images or 1-D feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleMode {
    Image2D,
    Feature1D,
}

impl SampleMode {
    pub fn code(self) -> u32 {
        match self {
            SampleMode::Image2D => 0,
            SampleMode::Feature1D => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(SampleMode::Image2D),
            1 => Some(SampleMode::Feature1D),
            _ => None,
        }
    }
}

/// Analysis dictionary: one atom (vectorized filter) per row.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisDictionary {
    omega: Matrix,
    geom: ConvGeometry,
    mode: SampleMode,
}

impl AnalysisDictionary {
    pub fn new(omega: Matrix, geom: ConvGeometry, mode: SampleMode) -> Result<Self> {
        geom.validate()?;
        if omega.cols() != geom.atom_len() {
            return Err(Error::InvalidInput(format!(
                "dictionary has {} columns, geometry atom length is {}",
                omega.cols(),
                geom.atom_len()
            )));
        }
        if mode == SampleMode::Feature1D && (geom.input_cols != 1 || geom.atom_cols != 1) {
            return Err(Error::InvalidInput(
                "feature mode requires single-column inputs and atoms".into(),
            ));
        }
        let d = Self { omega, geom, mode };
        let worst = d.max_atom_norm_sq();
        if worst > 1.0 + ATOM_NORM_SLACK {
            return Err(Error::InvalidInput(format!(
                "atom squared norm {worst} exceeds the unit ball"
            )));
        }
        Ok(d)
    }

    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    pub fn geom(&self) -> &ConvGeometry {
        &self.geom
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn atoms(&self) -> usize {
        self.omega.rows()
    }

    /// Length of one sample's code, `m · p`.
    pub fn code_len(&self) -> usize {
        self.atoms() * self.geom.patch_count()
    }

    pub fn max_atom_norm_sq(&self) -> f64 {
        (0..self.omega.rows())
            .map(|i| self.omega.row(i).iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Universal linear classifier `W` (`C × mp`) with its label vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    w: Matrix,
    class_names: Vec<String>,
}

impl LinearClassifier {
    pub fn new(w: Matrix, class_names: Vec<String>) -> Result<Self> {
        if class_names.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a classifier needs at least 2 classes, got {}",
                class_names.len()
            )));
        }
        if w.rows() != class_names.len() {
            return Err(Error::InvalidInput(format!(
                "classifier has {} rows for {} classes",
                w.rows(),
                class_names.len()
            )));
        }
        for (i, name) in class_names.iter().enumerate() {
            if class_names[..i].contains(name) {
                return Err(Error::InvalidInput(format!("duplicate class name {name:?}")));
            }
        }
        Ok(Self { w, class_names })
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn check_compatible(&self, dict: &AnalysisDictionary) -> Result<()> {
        if self.w.cols() != dict.code_len() {
            return Err(Error::InvalidInput(format!(
                "classifier expects codes of length {}, dictionary produces {}",
                self.w.cols(),
                dict.code_len()
            )));
        }
        Ok(())
    }

    pub(crate) fn with_weights(&self, w: Matrix) -> Result<Self> {
        Self::new(w, self.class_names.clone())
    }
}

/// One-hot `C × n` label matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: Matrix,
}

impl LabelMatrix {
    pub fn new(y: Matrix) -> Result<Self> {
        for j in 0..y.cols() {
            let mut ones = 0;
            for c in 0..y.rows() {
                match y.get(c, j) {
                    1.0 => ones += 1,
                    0.0 => {}
                    v => {
                        return Err(Error::InvalidInput(format!(
                            "label matrix entry ({c}, {j}) is {v}, expected 0 or 1"
                        )))
                    }
                }
            }
            if ones != 1 {
                return Err(Error::InvalidInput(format!(
                    "label column {j} has {ones} ones"
                )));
            }
        }
        Ok(Self { y })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.y
    }

    pub fn classes(&self) -> usize {
        self.y.rows()
    }

    pub fn samples(&self) -> usize {
        self.y.cols()
    }

    pub fn class_of(&self, j: usize) -> usize {
        (0..self.y.rows()).find(|&c| self.y.get(c, j) == 1.0).unwrap_or(0)
    }
}

pub fn one_hot_encode<S: AsRef<str>>(labels: &[S], vocabulary: &[String]) -> Result<LabelMatrix> {
    if labels.is_empty() || vocabulary.is_empty() {
        return Err(Error::InvalidInput("labels and vocabulary must be non-empty".into()));
    }
    let mut y = Matrix::zeros(vocabulary.len(), labels.len());
    for (j, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        let c = vocabulary
            .iter()
            .position(|v| v == label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown label {label:?}")))?;
        y.set(c, j, 1.0);
    }
    Ok(LabelMatrix { y })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Sparsity weight.
    pub lambda1: f64,
    /// Classification loss weight.
    pub lambda2: f64,
    /// Classifier ridge.
    pub lambda3: f64,
    /// Dictionary ridge.
    pub lambda4: f64,
    /// Step size shared by both code gradient steps.
    pub rho: f64,
    pub max_iter: usize,
    /// Stop once the relative objective change falls below this.
    pub tol: f64,
}

pub const DEFAULT_RHO: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-6;

impl Hyperparams {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, lambda4: f64, max_iter: usize) -> Self {
        Self {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
            rho: DEFAULT_RHO,
            max_iter,
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
            ("rho", self.rho),
            ("tol", self.tol),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be a finite nonnegative number, got {v}"
                )));
            }
        }
        for (name, v) in [("lambda3", self.lambda3), ("lambda4", self.lambda4), ("rho", self.rho), ("tol", self.tol)] {
            if v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self::new(0.001, 0.2, 0.1, 0.1, 23)
    }
}

/// Seeded random unit-norm atoms and an all-zero classifier.
pub fn init_model(
    geom: ConvGeometry,
    mode: SampleMode,
    atoms: usize,
    class_names: Vec<String>,
    seed: u64,
) -> Result<(AnalysisDictionary, LinearClassifier)> {
    geom.validate()?;
    if atoms == 0 {
        return Err(Error::InvalidInput("dictionary needs at least one atom".into()));
    }
    let len = geom.atom_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(atoms * len);
    for _ in 0..atoms {
        let row = loop {
            let row: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break row.into_iter().map(|v| v / norm).collect::<Vec<_>>();
            }
        };
        data.extend(row);
    }
    let dict = AnalysisDictionary::new(Matrix::new(atoms, len, data)?, geom, mode)?;
    let w = Matrix::zeros(class_names.len().max(1), dict.code_len());
    let clf = LinearClassifier::new(w, class_names)?;
    Ok((dict, clf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_hot_cases() {
        let y = one_hot_encode(&["a", "b", "a"], &names(&["a", "b"])).unwrap();
        assert_eq!(y.matrix().as_slice(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let y = one_hot_encode(&["b"], &names(&["a", "b"])).unwrap();
        assert_eq!(y.matrix().as_slice(), &[0.0, 1.0]);
        let y = one_hot_encode(&["a", "a"], &names(&["a"])).unwrap();
        assert_eq!(y.matrix().as_slice(), &[1.0, 1.0]);
        for j in 0..y.samples() {
            assert_eq!((0..y.classes()).map(|c| y.matrix().get(c, j)).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn one_hot_unknown_label_is_named() {
        let err = one_hot_encode(&["a", "zebra"], &names(&["a", "b"])).unwrap_err();
        assert!(err.to_string().contains("zebra"));
    }

    #[test]
    fn label_matrix_validation() {
        assert!(LabelMatrix::new(Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()).is_err());
        assert!(LabelMatrix::new(Matrix::from_rows(&[[0.5], [0.5]]).unwrap()).is_err());
    }

    #[test]
    fn init_is_unit_norm_and_deterministic() {
        let g = ConvGeometry::image(48, 42, 12, 6).unwrap();
        let (d, c) = init_model(g, SampleMode::Image2D, 50, names(&["x", "y"]), 9).unwrap();
        assert_eq!(d.omega().shape(), (50, 144));
        for i in 0..50 {
            let n: f64 = d.omega().row(i).iter().map(|v| v * v).sum();
            assert!((n.sqrt() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(c.w().shape(), (2, 50 * 42));
        assert!(c.w().as_slice().iter().all(|&v| v == 0.0));
        let (d2, _) = init_model(g, SampleMode::Image2D, 50, names(&["x", "y"]), 9).unwrap();
        assert_eq!(d.omega().as_slice(), d2.omega().as_slice());
        let (d3, _) = init_model(g, SampleMode::Image2D, 50, names(&["x", "y"]), 10).unwrap();
        assert_ne!(d.omega().as_slice(), d3.omega().as_slice());
    }

    #[test]
    fn init_rejects_single_class() {
        let g = ConvGeometry::image(4, 4, 2, 2).unwrap();
        assert!(init_model(g, SampleMode::Image2D, 3, names(&["only"]), 1).is_err());
        assert!(init_model(g, SampleMode::Image2D, 0, names(&["a", "b"]), 1).is_err());
    }

    #[test]
    fn hyperparam_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        let mut hp = Hyperparams::default();
        hp.lambda3 = 0.0;
        assert!(hp.validate().is_err());
        hp = Hyperparams::default();
        hp.lambda1 = -1.0;
        assert!(hp.validate().is_err());
        hp = Hyperparams::default();
        hp.rho = 0.0;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn dictionary_rejects_oversized_atoms() {
        let g = ConvGeometry::image(4, 4, 2, 2).unwrap();
        let omega = Matrix::from_rows(&[[1.0, 1.0, 0.0, 0.0]]).unwrap();
        assert!(AnalysisDictionary::new(omega, g, SampleMode::Image2D).is_err());
    }
}
