//! Block-coordinate-descent training of the convolutional analysis
//! dictionary, the code tensor and the universal classifier.
//!
//! Tracked objective, with `U` seen through its three views:
//!
//! ```text
//! ½‖Ω X̄ − Ū‖²_F + λ₁‖Û‖₁ + (λ₂/2)‖Y − W Ũ‖²_F + (λ₃/2)‖W‖²_F + (λ₄/2)‖Ω‖²_F
//! ```
//!
//! One iteration runs, in order: a gradient step on the fidelity term in the
//! `Ū` view, a gradient step on the classification term in the `Ũ` view,
//! soft-thresholding in the `Û` view, the closed-form ridge update of `W`,
//! the closed-form ridge update of `Ω`, and projection of each atom onto the
//! unit ball.

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius_norm_sq, matmul, matmul_tn, Matrix, RidgeSolver};
use crate::model::{
    init_model, AnalysisDictionary, Hyperparams, LabelMatrix, LinearClassifier, SampleMode,
};
use crate::patching::{reshape, CodeTensor, ConvGeometry};

#[derive(Debug, Clone)]
pub struct TrainState {
    pub dictionary: AnalysisDictionary,
    pub codes: CodeTensor,
    pub classifier: LinearClassifier,
    pub iteration: usize,
    /// Objective at the initial state followed by one entry per iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Individual terms of the tracked objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub fidelity: f64,
    pub sparsity: f64,
    pub classification: f64,
    pub classifier_ridge: f64,
    pub dictionary_ridge: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.fidelity + self.sparsity + self.classification + self.classifier_ridge + self.dictionary_ridge
    }
}

#[inline]
pub fn shrink(v: f64, theta: f64) -> f64 {
    v.signum() * (v.abs() - theta).max(0.0)
}

/// Elementwise `sign(v)·max(|v| − θ, 0)`.
pub fn soft_threshold(x: &Matrix, theta: f64) -> Result<Matrix> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "threshold must be finite and nonnegative, got {theta}"
        )));
    }
    Ok(x.map(|v| if v == 0.0 { v } else { shrink(v, theta) }))
}

pub fn objective_terms(
    xbar: &Matrix,
    state: &TrainState,
    y: &LabelMatrix,
    hp: &Hyperparams,
) -> Result<ObjectiveTerms> {
    let omega = state.dictionary.omega();
    let codes = &state.codes;
    let w = state.classifier.w();
    let p = state.dictionary.geom().patch_count();
    if codes.patches() != p || codes.atoms() != omega.rows() || codes.samples() != y.samples() {
        return Err(Error::dims(
            "objective",
            format!(
                "codes are p={} n={} m={}, expected p={} n={} m={}",
                codes.patches(),
                codes.samples(),
                codes.atoms(),
                p,
                y.samples(),
                omega.rows()
            ),
        ));
    }
    let omega_x = matmul(omega, xbar)?;
    let tilde = codes.view_tilde();
    let wu = matmul(w, &tilde)?;
    terms_from_parts(&omega_x, codes, &wu, state, y, hp)
}

fn terms_from_parts(
    omega_x: &Matrix,
    codes: &CodeTensor,
    wu: &Matrix,
    state: &TrainState,
    y: &LabelMatrix,
    hp: &Hyperparams,
) -> Result<ObjectiveTerms> {
    let fidelity = 0.5 * frobenius_norm_sq(&omega_x.sub(&codes.view_bar())?);
    let sparsity = hp.lambda1 * codes.values().iter().map(|v| v.abs()).sum::<f64>();
    let classification = 0.5 * hp.lambda2 * frobenius_norm_sq(&y.matrix().sub(wu)?);
    let classifier_ridge = 0.5 * hp.lambda3 * frobenius_norm_sq(state.classifier.w());
    let dictionary_ridge = 0.5 * hp.lambda4 * frobenius_norm_sq(state.dictionary.omega());
    Ok(ObjectiveTerms {
        fidelity,
        sparsity,
        classification,
        classifier_ridge,
        dictionary_ridge,
    })
}

pub fn objective(xbar: &Matrix, state: &TrainState, y: &LabelMatrix, hp: &Hyperparams) -> Result<f64> {
    Ok(objective_terms(xbar, state, y, hp)?.total())
}

/// `Ū − ρ(Ū − Ω X̄)`.
pub fn step_code_fidelity(ubar: &Matrix, omega: &Matrix, xbar: &Matrix, rho: f64) -> Result<Matrix> {
    let omega_x = matmul(omega, xbar)?;
    fidelity_step(ubar, &omega_x, rho)
}

fn fidelity_step(ubar: &Matrix, omega_x: &Matrix, rho: f64) -> Result<Matrix> {
    if ubar.shape() != omega_x.shape() {
        return Err(Error::dims(
            "step_code_fidelity",
            format!("codes {:?} vs analysis {:?}", ubar.shape(), omega_x.shape()),
        ));
    }
    // (1 − ρ)Ū + ρΩX̄ keeps both endpoints ρ = 0 and ρ = 1 exact
    let keep = 1.0 - rho;
    let mut out = ubar.clone();
    for (u, &t) in out.as_mut_slice().iter_mut().zip(omega_x.as_slice()) {
        *u = keep * *u + rho * t;
    }
    Ok(out)
}

/// Gradient step on `(λ₂/2)‖Y − W Ũ‖²_F`: `Ũ + ρ·λ₂·Wᵀ(Y − W Ũ)`.
pub fn step_code_classifier(utilde: &Matrix, w: &Matrix, y: &Matrix, rho: f64, lambda2: f64) -> Result<Matrix> {
    let residual = y.sub(&matmul(w, utilde)?)?;
    let grad = matmul_tn(w, &residual)?;
    let step = rho * lambda2;
    let mut out = utilde.clone();
    for (u, &g) in out.as_mut_slice().iter_mut().zip(grad.as_slice()) {
        *u += step * g;
    }
    Ok(out)
}

/// Minimizer of `(λ₂/2)‖Y − W Ũ‖²_F + (λ₃/2)‖W‖²_F`, i.e. the solution of
/// `W (λ₂ Ũ Ũᵀ + λ₃ I) = λ₂ Y Ũᵀ`.
pub fn update_classifier(y: &Matrix, utilde: &Matrix, lambda2: f64, lambda3: f64) -> Result<Matrix> {
    if y.cols() != utilde.cols() {
        return Err(Error::dims(
            "update_classifier",
            format!("labels have {} columns, codes have {}", y.cols(), utilde.cols()),
        ));
    }
    linalg::ridge_right(y, utilde, lambda2, lambda3)
}

/// Minimizer of `½‖Ω X̄ − Ū‖²_F + (λ₄/2)‖Ω‖²_F`, i.e. the solution of
/// `Ω (X̄ X̄ᵀ + λ₄ I) = Ū X̄ᵀ`.
pub fn update_dictionary(ubar: &Matrix, xbar: &Matrix, lambda4: f64) -> Result<Matrix> {
    if ubar.cols() != xbar.cols() {
        return Err(Error::dims(
            "update_dictionary",
            format!("codes have {} columns, patches have {}", ubar.cols(), xbar.cols()),
        ));
    }
    linalg::ridge_right(ubar, xbar, 1.0, lambda4)
}

/// Rescales rows with l2 norm above 1 to unit norm; other rows are left
/// untouched.
pub fn project_atoms(omega: &Matrix) -> Matrix {
    let mut out = omega.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm_sq: f64 = row.iter().map(|v| v * v).sum();
        if norm_sq > 1.0 {
            let norm = norm_sq.sqrt();
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    out
}

/// Shape of the model to initialize for [`train`].
#[derive(Debug, Clone)]
pub struct ModelLayout {
    pub geom: ConvGeometry,
    pub mode: SampleMode,
    pub atoms: usize,
    pub class_names: Vec<String>,
}

/// Stepwise driver for the training loop.
pub struct Trainer<'a> {
    xbar: &'a Matrix,
    y: &'a LabelMatrix,
    hp: Hyperparams,
    dictionary_solver: RidgeSolver,
    omega_x: Matrix,
    state: TrainState,
}

impl<'a> Trainer<'a> {
    /// Starts from the given dictionary and classifier with codes `Ū₀ = Ω X̄`.
    pub fn new(
        xbar: &'a Matrix,
        y: &'a LabelMatrix,
        dictionary: AnalysisDictionary,
        classifier: LinearClassifier,
        hp: Hyperparams,
    ) -> Result<Self> {
        let p = dictionary.geom().patch_count();
        let m = dictionary.atoms();
        Self::check_dims(xbar, y, &dictionary, &classifier)?;
        let omega_x = matmul(dictionary.omega(), xbar)?;
        let codes = CodeTensor::from_bar(&omega_x, p, y.samples(), m)?;
        Self::with_codes(xbar, y, dictionary, classifier, codes, hp)
    }

    /// Starts from an explicit code tensor.
    pub fn with_codes(
        xbar: &'a Matrix,
        y: &'a LabelMatrix,
        dictionary: AnalysisDictionary,
        classifier: LinearClassifier,
        codes: CodeTensor,
        hp: Hyperparams,
    ) -> Result<Self> {
        hp.validate()?;
        Self::check_dims(xbar, y, &dictionary, &classifier)?;
        if (codes.patches(), codes.samples(), codes.atoms())
            != (dictionary.geom().patch_count(), y.samples(), dictionary.atoms())
        {
            return Err(Error::dims("trainer", "code tensor does not match the model"));
        }
        let dictionary_solver = RidgeSolver::new(xbar, 1.0, hp.lambda4)?;
        let omega_x = matmul(dictionary.omega(), xbar)?;
        let mut state = TrainState {
            dictionary,
            codes,
            classifier,
            iteration: 0,
            objective_trace: Vec::new(),
            converged: false,
        };
        let wu = matmul(state.classifier.w(), &state.codes.view_tilde())?;
        let f0 = terms_from_parts(&omega_x, &state.codes, &wu, &state, y, &hp)?.total();
        if !f0.is_finite() {
            return Err(Error::Numerical("initial objective is not finite".into()));
        }
        state.objective_trace.push(f0);
        Ok(Self {
            xbar,
            y,
            hp,
            dictionary_solver,
            omega_x,
            state,
        })
    }

    fn check_dims(
        xbar: &Matrix,
        y: &LabelMatrix,
        dictionary: &AnalysisDictionary,
        classifier: &LinearClassifier,
    ) -> Result<()> {
        let geom = dictionary.geom();
        if xbar.rows() != geom.atom_len() {
            return Err(Error::dims(
                "train",
                format!("patch matrix has {} rows, atoms have length {}", xbar.rows(), geom.atom_len()),
            ));
        }
        let p = geom.patch_count();
        if xbar.cols() != y.samples() * p {
            return Err(Error::dims(
                "train",
                format!(
                    "patch matrix has {} columns, expected n·p = {}·{}",
                    xbar.cols(),
                    y.samples(),
                    p
                ),
            ));
        }
        if y.classes() != classifier.classes() {
            return Err(Error::dims(
                "train",
                format!("{} label rows for {} classes", y.classes(), classifier.classes()),
            ));
        }
        classifier.check_compatible(dictionary)
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn into_state(self) -> TrainState {
        self.state
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    /// Runs one full iteration and returns the new objective value.
    pub fn step(&mut self) -> Result<f64> {
        let iteration = self.state.iteration + 1;
        self.step_inner().map_err(|e| Error::Training {
            iteration,
            source: Box::new(e),
        })
    }

    fn step_inner(&mut self) -> Result<f64> {
        let hp = self.hp;
        let y = self.y.matrix();
        let p = self.state.codes.patches();
        let n = self.state.codes.samples();
        let m = self.state.codes.atoms();

        let ubar = self.state.codes.view_bar();
        let ubar = fidelity_step(&ubar, &self.omega_x, hp.rho)?;
        let tilde = reshape::bar_to_tilde(&ubar, p, n, m)?;
        let tilde = step_code_classifier(&tilde, self.state.classifier.w(), y, hp.rho, hp.lambda2)?;
        let hat = reshape::tilde_to_hat(&tilde, p, n, m)?;
        let hat = soft_threshold(&hat, hp.rho * hp.lambda1)?;
        let codes = CodeTensor::from_hat(&hat, p, n, m)?;
        let tilde = codes.view_tilde();
        let w = update_classifier(y, &tilde, hp.lambda2, hp.lambda3)?;
        let ubar = codes.view_bar();
        let omega = self.dictionary_solver.solve(&ubar, self.xbar)?;
        let omega = project_atoms(&omega);

        let geom = *self.state.dictionary.geom();
        let mode = self.state.dictionary.mode();
        self.state.dictionary = AnalysisDictionary::new(omega, geom, mode)?;
        self.state.classifier = self.state.classifier.with_weights(w)?;
        self.state.codes = codes;
        self.omega_x = matmul(self.state.dictionary.omega(), self.xbar)?;

        let wu = matmul(self.state.classifier.w(), &tilde)?;
        let f = terms_from_parts(&self.omega_x, &self.state.codes, &wu, &self.state, self.y, &hp)?.total();
        if !f.is_finite() {
            return Err(Error::Numerical("objective diverged".into()));
        }
        self.state.iteration += 1;
        self.state.objective_trace.push(f);
        Ok(f)
    }

    /// Iterates until `max_iter` is reached or the relative objective change
    /// drops below `tol`.
    pub fn run(mut self) -> Result<TrainState> {
        while self.state.iteration < self.hp.max_iter {
            let prev = *self.state.objective_trace.last().expect("trace starts non-empty");
            let cur = self.step()?;
            if relative_change(prev, cur) < self.hp.tol {
                self.state.converged = true;
                break;
            }
        }
        Ok(self.state)
    }
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    let diff = (prev - cur).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / prev.abs().max(f64::MIN_POSITIVE)
    }
}

/// Initializes a model from `seed` and trains it on `xbar`.
pub fn train(
    xbar: &Matrix,
    y: &LabelMatrix,
    layout: &ModelLayout,
    hp: &Hyperparams,
    seed: u64,
) -> Result<TrainState> {
    hp.validate()?;
    let (dictionary, classifier) = init_model(
        layout.geom,
        layout.mode,
        layout.atoms,
        layout.class_names.clone(),
        seed,
    )?;
    Trainer::new(xbar, y, dictionary, classifier, *hp)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::one_hot_encode;
    use crate::patching::build_patch_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn m1(v: f64) -> Matrix {
        Matrix::from_rows(&[[v]]).unwrap()
    }

    struct Instance {
        xbar: Matrix,
        y: LabelMatrix,
        layout: ModelLayout,
    }

    fn instance(seed: u64, n: usize, atoms: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geom = ConvGeometry::image(6, 6, 3, 3).unwrap();
        let samples: Vec<Matrix> = (0..n)
            .map(|_| Matrix::from_fn(6, 6, |_, _| rng.random_range(0.0..1.0)))
            .collect();
        let classes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let labels: Vec<&str> = (0..n).map(|j| classes[j % 3].as_str()).collect();
        Instance {
            xbar: build_patch_matrix(&samples, &geom).unwrap(),
            y: one_hot_encode(&labels, &classes).unwrap(),
            layout: ModelLayout {
                geom,
                mode: SampleMode::Image2D,
                atoms,
                class_names: classes,
            },
        }
    }

    #[test]
    fn soft_threshold_cases() {
        let x = Matrix::from_rows(&[[1.2, -0.3, 0.0, -2.0]]).unwrap();
        let t = soft_threshold(&x, 0.5).unwrap();
        let want = [0.7, 0.0, 0.0, -1.5];
        for (a, b) in t.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(soft_threshold(&x, 0.0).unwrap(), x);
        assert!(soft_threshold(&x, -0.1).is_err());
    }

    #[test]
    fn soft_threshold_is_the_l1_prox() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v: f64 = rng.random_range(-3.0..3.0);
            let theta: f64 = rng.random_range(0.0..2.0);
            let steps = 60_000;
            let (mut best_z, mut best) = (0.0, f64::INFINITY);
            for s in 0..=steps {
                let z = -3.0 + s as f64 * 1e-4;
                let f = 0.5 * (z - v) * (z - v) + theta * z.abs();
                if f < best {
                    best = f;
                    best_z = z;
                }
            }
            assert!((shrink(v, theta) - best_z).abs() <= 2e-4);
        }
    }

    #[test]
    fn fidelity_step_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = random(&mut rng, 2, 3);
        let xbar = random(&mut rng, 3, 4);
        let ubar = random(&mut rng, 2, 4);
        assert_eq!(step_code_fidelity(&ubar, &omega, &xbar, 0.0).unwrap(), ubar);
        let full = step_code_fidelity(&ubar, &omega, &xbar, 1.0).unwrap();
        assert_eq!(full, matmul(&omega, &xbar).unwrap());
        let half = step_code_fidelity(&m1(2.0), &m1(0.0), &m1(5.0), 0.5).unwrap();
        assert_eq!(half.as_slice(), &[1.0]);
        assert!(step_code_fidelity(&random(&mut rng, 2, 5), &omega, &xbar, 0.1).is_err());
    }

    #[test]
    fn classifier_step_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random(&mut rng, 6, 3);
        let y = random(&mut rng, 2, 3);
        assert_eq!(step_code_classifier(&u, &Matrix::zeros(2, 6), &y, 0.3, 0.7).unwrap(), u);
        let one = step_code_classifier(&m1(0.0), &m1(1.0), &m1(1.0), 1.0, 1.0).unwrap();
        assert_eq!(one.as_slice(), &[1.0]);
    }

    #[test]
    fn classifier_step_follows_negative_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (rho, lambda2) = (0.25, 0.6);
        let u = random(&mut rng, 6, 4);
        let w = random(&mut rng, 3, 6);
        let y = random(&mut rng, 3, 4);
        let dir = random(&mut rng, 6, 4);
        let loss = |u: &Matrix| 0.5 * lambda2 * frobenius_norm_sq(&y.sub(&matmul(&w, u).unwrap()).unwrap());
        let h = 1e-6;
        let plus = u.add(&dir.scaled(h)).unwrap();
        let minus = u.sub(&dir.scaled(h)).unwrap();
        let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let stepped = step_code_classifier(&u, &w, &y, rho, lambda2).unwrap();
        let neg_grad = stepped.sub(&u).unwrap().scaled(1.0 / rho);
        let analytic: f64 = -neg_grad.as_slice().iter().zip(dir.as_slice()).map(|(a, b)| a * b).sum::<f64>();
        assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1e-12));
    }

    #[test]
    fn classifier_update_cases() {
        let w = update_classifier(&Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), &Matrix::zeros(3, 2), 0.5, 0.1).unwrap();
        assert!(w.as_slice().iter().all(|&v| v == 0.0));
        let w = update_classifier(&m1(2.0), &m1(1.0), 1.0, 1.0).unwrap();
        assert!((w.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classifier_update_zeroes_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (l2, l3) = (0.3, 0.05);
        let y = random(&mut rng, 2, 8);
        let u = random(&mut rng, 8, 8);
        let w = update_classifier(&y, &u, l2, l3).unwrap();
        // ∇ = −λ₂ (Y − W Ũ) Ũᵀ + λ₃ W
        let r = y.sub(&matmul(&w, &u).unwrap()).unwrap();
        let grad = linalg::matmul_nt(&r, &u).unwrap().scaled(-l2).add(&w.scaled(l3)).unwrap();
        assert!(frobenius_norm_sq(&grad).sqrt() <= 1e-8);
    }

    #[test]
    fn dictionary_update_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let xbar = random(&mut rng, 4, 6);
        let omega = update_dictionary(&Matrix::zeros(3, 6), &xbar, 0.2).unwrap();
        assert!(omega.as_slice().iter().all(|&v| v == 0.0));
        let ubar = random(&mut rng, 3, 5);
        let omega = update_dictionary(&ubar, &Matrix::identity(5), 1e-12).unwrap();
        assert!(omega.sub(&ubar).unwrap().max_abs() <= 1e-6);
        let omega = update_dictionary(&random(&mut rng, 3, 6), &xbar, 0.2).unwrap();
        assert_eq!(omega.shape(), (3, 4));
        assert!(update_dictionary(&ubar, &xbar, 0.2).is_err());
    }

    #[test]
    fn projection_cases() {
        let om = Matrix::from_rows(&[[3.0, 4.0], [0.3, 0.4], [0.0, 0.0]]).unwrap();
        let p = project_atoms(&om);
        assert!((p.get(0, 0) - 0.6).abs() < 1e-15 && (p.get(0, 1) - 0.8).abs() < 1e-15);
        assert_eq!(p.row(1), om.row(1));
        assert_eq!(p.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn objective_of_empty_model_counts_labels() {
        let inst = instance(11, 5, 2);
        let hp = Hyperparams::new(0.1, 0.4, 0.2, 0.3, 1);
        let (mut d, c) = init_model(inst.layout.geom, SampleMode::Image2D, 2, inst.layout.class_names.clone(), 1).unwrap();
        d = AnalysisDictionary::new(Matrix::zeros(2, 9), *d.geom(), d.mode()).unwrap();
        let state = TrainState {
            dictionary: d,
            codes: CodeTensor::zeros(4, 5, 2).unwrap(),
            classifier: c,
            iteration: 0,
            objective_trace: vec![],
            converged: false,
        };
        let f = objective(&inst.xbar, &state, &inst.y, &hp).unwrap();
        assert!((f - 0.4 / 2.0 * 5.0).abs() < 1e-14);
    }

    #[test]
    fn objective_with_exact_codes_is_dictionary_ridge() {
        let inst = instance(12, 4, 3);
        let hp = Hyperparams::new(0.0, 0.0, 0.2, 0.3, 1);
        let (d, c) = init_model(inst.layout.geom, SampleMode::Image2D, 3, inst.layout.class_names.clone(), 2).unwrap();
        let bar = matmul(d.omega(), &inst.xbar).unwrap();
        let state = TrainState {
            codes: CodeTensor::from_bar(&bar, 4, 4, 3).unwrap(),
            dictionary: d.clone(),
            classifier: c,
            iteration: 0,
            objective_trace: vec![],
            converged: false,
        };
        let f = objective(&inst.xbar, &state, &inst.y, &hp).unwrap();
        assert!((f - 0.15 * frobenius_norm_sq(d.omega())).abs() < 1e-13);
    }

    #[test]
    fn decoupled_single_iteration() {
        let inst = instance(13, 6, 3);
        let mut hp = Hyperparams::new(0.0, 0.0, 0.1, 0.5, 1);
        hp.tol = 1e-300;
        let (d0, _) = init_model(inst.layout.geom, SampleMode::Image2D, 3, inst.layout.class_names.clone(), 4).unwrap();
        let state = train(&inst.xbar, &inst.y, &inst.layout, &hp, 4).unwrap();
        let u0 = matmul(d0.omega(), &inst.xbar).unwrap();
        // codes start at Ω₀X̄, so the fidelity step keeps them there
        assert!(state.codes.view_bar().sub(&u0).unwrap().max_abs() < 1e-12);
        let want = project_atoms(&update_dictionary(&u0, &inst.xbar, 0.5).unwrap());
        assert!(state.dictionary.omega().sub(&want).unwrap().max_abs() < 1e-12);
        assert!(state.classifier.w().as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(state.objective_trace.len(), 2);
    }

    #[test]
    fn trace_length_tracks_iterations() {
        let inst = instance(14, 9, 4);
        let mut hp = Hyperparams::new(0.01, 0.2, 0.1, 0.1, 7);
        hp.tol = 1e-300;
        let state = train(&inst.xbar, &inst.y, &inst.layout, &hp, 1).unwrap();
        assert_eq!(state.iteration, 7);
        assert_eq!(state.objective_trace.len(), 8);
        hp.max_iter = 0;
        let state = train(&inst.xbar, &inst.y, &inst.layout, &hp, 1).unwrap();
        assert_eq!(state.objective_trace.len(), 1);
    }

    #[test]
    fn objective_decreases_on_small_instance() {
        let inst = instance(15, 12, 4);
        let mut hp = Hyperparams::new(0.01, 0.3, 0.1, 0.1, 30);
        hp.tol = 1e-300;
        let state = train(&inst.xbar, &inst.y, &inst.layout, &hp, 3).unwrap();
        for pair in state.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs(), "{pair:?}");
        }
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let inst = instance(16, 6, 2);
        let hp = Hyperparams::new(0.0, 0.0, 0.1, 0.1, 1);
        let (d, c) = init_model(inst.layout.geom, SampleMode::Image2D, 2, inst.layout.class_names.clone(), 1).unwrap();
        let d = AnalysisDictionary::new(Matrix::zeros(2, 9), *d.geom(), d.mode()).unwrap();
        let codes = CodeTensor::zeros(4, 6, 2).unwrap();
        let mut t = Trainer::with_codes(&inst.xbar, &inst.y, d, c, codes, hp).unwrap();
        let f0 = t.state().objective_trace[0];
        let f1 = t.step().unwrap();
        assert!((f1 - f0).abs() <= 1e-10 * f0.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn train_rejects_mismatched_inputs() {
        let inst = instance(17, 6, 2);
        let hp = Hyperparams::default();
        let short = Matrix::zeros(9, 20);
        assert!(train(&short, &inst.y, &inst.layout, &hp, 1).is_err());
        let mut bad = hp;
        bad.lambda4 = 0.0;
        assert!(train(&inst.xbar, &inst.y, &inst.layout, &bad, 1).is_err());
    }
}
