//! Named configurations for the four benchmark datasets.

use crate::dataio::SplitSpec;
use crate::error::{Error, Result};
use crate::model::{Hyperparams, SampleMode};
use crate::patching::ConvGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub mode: SampleMode,
    pub geom: ConvGeometry,
    pub atoms: usize,
    pub hyperparams: Hyperparams,
    pub split: SplitSpec,
}

const fn geom(ir: usize, ic: usize, ar: usize, ac: usize, sr: usize, sc: usize) -> ConvGeometry {
    ConvGeometry {
        input_rows: ir,
        input_cols: ic,
        atom_rows: ar,
        atom_cols: ac,
        stride_rows: sr,
        stride_cols: sc,
    }
}

fn hp(l1: f64, l2: f64, l3: f64, l4: f64, t: usize) -> Hyperparams {
    Hyperparams::new(l1, l2, l3, l4, t)
}

/// 48×42 face crops, 12×12 atoms at stride 6, half of each class for training.
pub fn yaleb() -> Preset {
    Preset {
        name: "yaleb",
        mode: SampleMode::Image2D,
        geom: geom(48, 42, 12, 12, 6, 6),
        atoms: 50,
        hyperparams: hp(0.001, 0.2, 0.1, 0.1, 23),
        split: SplitSpec::Fraction(0.5),
    }
}

/// 55×40 face crops, 12×12 atoms at stride 6, 20 training images per class.
pub fn ar() -> Preset {
    Preset {
        name: "ar",
        mode: SampleMode::Image2D,
        geom: geom(55, 40, 12, 12, 6, 6),
        atoms: 50,
        hyperparams: hp(0.0001, 0.005, 0.0001, 1.3, 37),
        split: SplitSpec::PerClass(20),
    }
}

/// 3000-d feature vectors, 1500×1 atoms at stride 1500, 30 per class.
pub fn caltech101() -> Preset {
    Preset {
        name: "caltech101",
        mode: SampleMode::Feature1D,
        geom: geom(3000, 1, 1500, 1, 1500, 1),
        atoms: 152,
        hyperparams: hp(0.0001, 0.01, 0.006, 0.15, 48),
        split: SplitSpec::PerClass(30),
    }
}

/// 3000-d feature vectors, 1500×1 atoms at stride 1500, 100 per class.
pub fn scene15() -> Preset {
    Preset {
        name: "scene15",
        mode: SampleMode::Feature1D,
        geom: geom(3000, 1, 1500, 1, 1500, 1),
        atoms: 100,
        hyperparams: hp(0.01, 0.5, 0.09, 0.55, 15),
        split: SplitSpec::PerClass(100),
    }
}

pub fn all() -> [Preset; 4] {
    [yaleb(), ar(), caltech101(), scene15()]
}

pub fn by_name(name: &str) -> Result<Preset> {
    let key = name.to_ascii_lowercase().replace(['-', '_'], "");
    all()
        .into_iter()
        .find(|p| p.name == key)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?} (expected yaleb, ar, caltech101 or scene15)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for p in all() {
            p.geom.validate().unwrap();
            p.hyperparams.validate().unwrap();
        }
        assert_eq!(yaleb().geom.patch_count(), 42);
        assert_eq!(caltech101().geom.patch_count(), 2);
        assert_eq!(by_name("Scene-15").unwrap().atoms, 100);
        assert!(by_name("mnist").is_err());
    }
}
