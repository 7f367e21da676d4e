//! Versioned binary model files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "DCADL1\0"                                   7-byte magic, the digit is the version
//! u32 mode                                     0 = image, 1 = feature vector
//! u32 × 6 input_rows input_cols atom_rows atom_cols stride_rows stride_cols
//! u32 m, u32 p, u32 C
//! f64 × 5 lambda1 lambda2 lambda3 lambda4 rho
//! C × (u16 byte length, UTF-8 class name)
//! m · atom_len f64                             dictionary, row-major
//! C · m · p f64                                classifier, row-major
//! ```
//!
//! `max_iter` and `tol` are not stored; loaded hyperparameters carry the
//! defaults for those two fields.

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::linalg::Matrix;
use crate::model::{AnalysisDictionary, Hyperparams, LinearClassifier, SampleMode};
use crate::patching::ConvGeometry;
use crate::wire::{Reader, WireError, Writer};

pub const MODEL_MAGIC: &[u8; 7] = b"DCADL1\0";
pub const FORMAT_VERSION: u8 = b'1';

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub dictionary: AnalysisDictionary,
    pub classifier: LinearClassifier,
    pub hyperparams: Hyperparams,
}

pub fn encode_model(dict: &AnalysisDictionary, clf: &LinearClassifier, hp: &Hyperparams) -> Result<Vec<u8>> {
    clf.check_compatible(dict)?;
    let g = dict.geom();
    let mut w = Writer::default();
    w.bytes(MODEL_MAGIC);
    w.u32(dict.mode().code());
    for v in [
        g.input_rows,
        g.input_cols,
        g.atom_rows,
        g.atom_cols,
        g.stride_rows,
        g.stride_cols,
        dict.atoms(),
        g.patch_count(),
        clf.classes(),
    ] {
        w.u32(u32::try_from(v).map_err(|_| Error::InvalidInput(format!("dimension {v} exceeds u32")))?);
    }
    for v in [hp.lambda1, hp.lambda2, hp.lambda3, hp.lambda4, hp.rho] {
        w.f64(v);
    }
    for name in clf.class_names() {
        w.string(name)?;
    }
    w.f64s(dict.omega().as_slice());
    w.f64s(clf.w().as_slice());
    Ok(w.into_bytes())
}

/// Writes the model; nothing is written if the parts are inconsistent.
pub fn save_model(dict: &AnalysisDictionary, clf: &LinearClassifier, hp: &Hyperparams, path: &Path) -> Result<()> {
    let bytes = encode_model(dict, clf, hp)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn decode_model(path: &Path, bytes: &[u8]) -> Result<TrainedModel> {
    let fmt = |k| Error::format(path, k);
    let inconsistent = |msg: String| fmt(FormatError::Inconsistent(msg));
    if bytes.len() < MODEL_MAGIC.len() || bytes[..5] != MODEL_MAGIC[..5] || bytes[6] != 0 {
        return Err(fmt(FormatError::NotAModelFile));
    }
    if bytes[5] != FORMAT_VERSION {
        return Err(fmt(FormatError::UnsupportedVersion(bytes[5])));
    }
    let wire = |e: WireError| match e {
        WireError::Truncated => fmt(FormatError::Truncated),
        WireError::Utf8 => inconsistent("class name is not UTF-8".into()),
    };
    let mut r = Reader::new(&bytes[MODEL_MAGIC.len()..]);
    let mode_code = r.u32().map_err(wire)?;
    let mut dims = [0usize; 9];
    for d in dims.iter_mut() {
        *d = r.u32().map_err(wire)? as usize;
    }
    let [ir, ic, ar, ac, sr, sc, m, p, c] = dims;
    let mut lambdas = [0.0; 5];
    for l in lambdas.iter_mut() {
        *l = r.f64().map_err(wire)?;
    }

    let mode = SampleMode::from_code(mode_code).ok_or_else(|| inconsistent(format!("unknown mode {mode_code}")))?;
    let geom = ConvGeometry::new(ir, ic, ar, ac, sr, sc).map_err(|e| inconsistent(e.to_string()))?;
    if geom.patch_count() != p {
        return Err(inconsistent(format!(
            "stored patch count {p} disagrees with geometry ({})",
            geom.patch_count()
        )));
    }
    if m == 0 || c < 2 {
        return Err(inconsistent(format!("atom count {m} and class count {c} out of range")));
    }
    let [lambda1, lambda2, lambda3, lambda4, rho] = lambdas;
    let hp = Hyperparams {
        rho,
        ..Hyperparams::new(lambda1, lambda2, lambda3, lambda4, Hyperparams::default().max_iter)
    };
    hp.validate().map_err(|e| inconsistent(e.to_string()))?;

    let mut names = Vec::with_capacity(c);
    for _ in 0..c {
        names.push(r.string().map_err(wire)?);
    }
    let omega_len = m.checked_mul(geom.atom_len());
    let w_len = m.checked_mul(p).and_then(|mp| mp.checked_mul(c));
    let (omega_len, w_len) = match (omega_len, w_len) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(inconsistent("payload size overflows".into())),
    };
    if r.remaining() / 8 < omega_len.saturating_add(w_len) {
        return Err(fmt(FormatError::Truncated));
    }
    let omega = r.f64s(omega_len).map_err(wire)?;
    let w = r.f64s(w_len).map_err(wire)?;
    if r.remaining() != 0 {
        return Err(fmt(FormatError::TrailingBytes));
    }
    let omega = Matrix::new(m, geom.atom_len(), omega).map_err(|e| inconsistent(e.to_string()))?;
    let w = Matrix::new(c, m * p, w).map_err(|e| inconsistent(e.to_string()))?;
    let dictionary = AnalysisDictionary::new(omega, geom, mode).map_err(|e| inconsistent(e.to_string()))?;
    let classifier = LinearClassifier::new(w, names).map_err(|e| inconsistent(e.to_string()))?;
    Ok(TrainedModel {
        dictionary,
        classifier,
        hyperparams: hp,
    })
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(path, &bytes)
}
