//! The trainable quantum regressor.
//!
//! A model is a composed feature-map + ansatz template with one trainable
//! angle per RY gate. Its scaled prediction is `<Z x ... x Z>` of the bound
//! circuit, which is then mapped back to kW through the fitted target scale.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_ansatz, build_z_feature_map, build_zz_feature_map, compose, Angle, BoundGate,
    CircuitTemplate, EntanglementStrategy, GateSpec,
};
use crate::data::{ScaledSet, ScalingSpec, N_FEATURES};
use crate::error::{Error, Result};
use crate::optimizer::{minimize, OptimizerOptions, Status, TracePoint};
use crate::par;
use crate::statevector::{Statevector, Unitary2x2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureMapKind {
    Z,
    #[serde(rename = "ZZ")]
    Zz,
}

impl FeatureMapKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMapKind::Z => "Z",
            FeatureMapKind::Zz => "ZZ",
        }
    }
}

impl fmt::Display for FeatureMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the twelve `QNN-n` configurations: 1-6 use the Z map, 7-12 the
/// ZZ map, each cycling through linear, full, circular, SCA, reverse
/// linear, pairwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QnnConfigId(u8);

impl QnnConfigId {
    pub const COUNT: u8 = 12;

    pub fn new(n: u8) -> Result<Self> {
        if (1..=Self::COUNT).contains(&n) {
            Ok(QnnConfigId(n))
        } else {
            Err(Error::invalid(format!(
                "QNN configuration must be 1..={}, got {n}",
                Self::COUNT
            )))
        }
    }

    pub fn all() -> impl Iterator<Item = QnnConfigId> {
        (1..=Self::COUNT).map(QnnConfigId)
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn feature_map(self) -> FeatureMapKind {
        if self.0 <= 6 {
            FeatureMapKind::Z
        } else {
            FeatureMapKind::Zz
        }
    }

    pub fn ansatz(self) -> EntanglementStrategy {
        EntanglementStrategy::ALL[usize::from((self.0 - 1) % 6)]
    }
}

impl fmt::Display for QnnConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QNN-{}", self.0)
    }
}

impl FromStr for QnnConfigId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix("QNN-")
            .and_then(|n| n.parse::<u8>().ok())
            .ok_or_else(|| Error::invalid(format!("`{s}` is not a QNN configuration id")))
            .and_then(QnnConfigId::new)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    ParameterShift,
    FiniteDifference,
}

/// Circuit shape and training knobs shared by all QNN configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnSettings {
    pub feature_map_reps: usize,
    pub ansatz_reps: usize,
    pub zz_entanglement: EntanglementStrategy,
    pub init_seed: u64,
    pub gradient_mode: GradientMode,
    pub finite_difference_step: f64,
}

impl Default for QnnSettings {
    fn default() -> Self {
        QnnSettings {
            feature_map_reps: 2,
            ansatz_reps: 3,
            zz_entanglement: EntanglementStrategy::Full,
            init_seed: 42,
            gradient_mode: GradientMode::ParameterShift,
            finite_difference_step: 1e-8,
        }
    }
}

/// Composed template for `(feature map, ansatz)` on `n_qubits` wires.
pub fn build_template(
    feature_map: FeatureMapKind,
    ansatz: EntanglementStrategy,
    n_qubits: usize,
    settings: &QnnSettings,
) -> Result<CircuitTemplate> {
    let map = match feature_map {
        FeatureMapKind::Z => build_z_feature_map(n_qubits, settings.feature_map_reps)?,
        FeatureMapKind::Zz => build_zz_feature_map(
            n_qubits,
            settings.feature_map_reps,
            settings.zz_entanglement,
        )?,
    };
    compose(&map, &build_ansatz(n_qubits, settings.ansatz_reps, ansatz)?)
}

/// `count` draws from U[-pi, pi], in slot order.
pub fn initial_parameters(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(-PI..PI)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct QnnModel {
    template: CircuitTemplate,
    parameters: Vec<f64>,
    /// Gate index of the RY fed by each parameter slot.
    parameter_gates: Vec<usize>,
    scaling: Option<ScalingSpec>,
    label: String,
}

impl QnnModel {
    /// Every parameter slot must drive exactly one RY gate.
    pub fn new(
        template: CircuitTemplate,
        parameters: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if parameters.len() != template.n_parameter_slots() {
            return Err(Error::invalid(format!(
                "template has {} parameter slots, got {} values",
                template.n_parameter_slots(),
                parameters.len()
            )));
        }
        let mut parameter_gates = vec![usize::MAX; parameters.len()];
        for (i, g) in template.gates().iter().enumerate() {
            match g {
                GateSpec::Ry {
                    angle: Angle::Parameter(k),
                    ..
                } if parameter_gates[*k] == usize::MAX => parameter_gates[*k] = i,
                GateSpec::Ry {
                    angle: Angle::Parameter(k),
                    ..
                } => {
                    return Err(Error::invalid(format!(
                        "parameter t{k} drives more than one gate"
                    )))
                }
                GateSpec::P {
                    angle: Angle::Parameter(k),
                    ..
                } => {
                    return Err(Error::invalid(format!(
                        "parameter t{k} drives a phase gate; only RY is differentiable here"
                    )))
                }
                _ => {}
            }
        }
        Ok(QnnModel {
            template,
            parameters,
            parameter_gates,
            scaling: None,
            label: label.into(),
        })
    }

    /// Table configuration with seeded initial parameters.
    pub fn for_config(id: QnnConfigId, n_qubits: usize, settings: &QnnSettings) -> Result<Self> {
        let template = build_template(id.feature_map(), id.ansatz(), n_qubits, settings)?;
        let params = initial_parameters(template.n_parameter_slots(), settings.init_seed);
        QnnModel::new(template, params, id.to_string())
    }

    pub fn with_scaling(mut self, scaling: ScalingSpec) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn set_parameters(&mut self, parameters: Vec<f64>) -> Result<()> {
        if parameters.len() != self.parameters.len() {
            return Err(Error::invalid("parameter vector length changed"));
        }
        self.parameters = parameters;
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scaling(&self) -> Option<&ScalingSpec> {
        self.scaling.as_ref()
    }

    pub fn predict_scaled(&self, features_scaled: &[f64]) -> Result<f64> {
        self.output(features_scaled, &self.parameters)
    }

    fn output(&self, x: &[f64], params: &[f64]) -> Result<f64> {
        self.template.evaluate(x, params)
    }

    /// Scales raw features, predicts, and maps the output back to kW.
    pub fn predict_physical(&self, features: &[f64; N_FEATURES]) -> Result<f64> {
        let scaling = self
            .scaling
            .as_ref()
            .ok_or_else(|| Error::State("model has no fitted scaling".into()))?;
        let y = self.predict_scaled(&scaling.scale_features(features))?;
        Ok(scaling.invert_target(y))
    }

    pub fn predict_batch_scaled(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        par::map_ordered(features, |x| self.predict_scaled(x))
            .into_iter()
            .collect()
    }

    fn check_batch(&self, features: &[Vec<f64>], targets: &[f64]) -> Result<()> {
        if features.is_empty() {
            return Err(Error::invalid("loss needs at least one sample"));
        }
        if features.len() != targets.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} targets",
                features.len(),
                targets.len()
            )));
        }
        Ok(())
    }

    fn loss_at(&self, params: &[f64], features: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        self.check_batch(features, targets)?;
        let outputs: Vec<f64> = par::map_ordered(features, |x| self.output(x, params))
            .into_iter()
            .collect::<Result<_>>()?;
        let sse: f64 = outputs
            .iter()
            .zip(targets)
            .map(|(f, y)| (f - y).powi(2))
            .sum();
        Ok(sse / targets.len() as f64)
    }

    /// Mean squared error in scaled target space.
    pub fn loss_mse(&self, features: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        self.loss_at(&self.parameters, features, targets)
    }

    /// Output and its parameter-shift derivatives for one sample.
    ///
    /// The circuit runs once while snapshotting the state in front of each
    /// parameterized gate; each shifted evaluation restarts from its
    /// snapshot instead of from `|0...0>`.
    fn sample_shift_gradient(&self, x: &[f64], params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let bound = self.template.bind(x, params)?;
        let mut state = Statevector::zero(self.template.n_qubits())?;
        let mut is_parameter_gate = vec![false; bound.len()];
        for &g in &self.parameter_gates {
            is_parameter_gate[g] = true;
        }
        let mut snapshots: Vec<Option<Statevector>> = vec![None; bound.len()];
        for (i, gate) in bound.iter().enumerate() {
            if is_parameter_gate[i] {
                snapshots[i] = Some(state.clone());
            }
            gate.apply(&mut state)?;
        }
        let value = state.expect_z_all();

        let mut grad = Vec::with_capacity(params.len());
        for &g in &self.parameter_gates {
            let BoundGate::Ry(qubit, theta) = bound[g] else {
                unreachable!("parameter gates are RY");
            };
            let start = snapshots[g].as_ref().expect("snapshot taken");
            let shifted = |delta: f64| -> Result<f64> {
                let mut s = start.clone();
                s.apply_1q(&Unitary2x2::ry(theta + delta), qubit)?;
                for gate in &bound[g + 1..] {
                    gate.apply(&mut s)?;
                }
                Ok(s.expect_z_all())
            };
            let plus = shifted(FRAC_PI_2)?;
            let minus = shifted(-FRAC_PI_2)?;
            grad.push(0.5 * (plus - minus));
        }
        Ok((value, grad))
    }

    fn loss_and_shift_gradient_at(
        &self,
        params: &[f64],
        features: &[Vec<f64>],
        targets: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        self.check_batch(features, targets)?;
        let per_sample: Vec<(f64, Vec<f64>)> =
            par::map_ordered(features, |x| self.sample_shift_gradient(x, params))
                .into_iter()
                .collect::<Result<_>>()?;
        let n = targets.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; params.len()];
        for ((f, df), y) in per_sample.iter().zip(targets) {
            let r = f - y;
            loss += r * r;
            for (g, d) in grad.iter_mut().zip(df) {
                *g += r * d;
            }
        }
        for g in grad.iter_mut() {
            *g *= 2.0 / n;
        }
        Ok((loss / n, grad))
    }

    /// Exact gradient of [`QnnModel::loss_mse`] by the parameter-shift rule.
    pub fn gradient_parameter_shift(
        &self,
        features: &[Vec<f64>],
        targets: &[f64],
    ) -> Result<Vec<f64>> {
        Ok(self
            .loss_and_shift_gradient_at(&self.parameters, features, targets)?
            .1)
    }

    fn finite_difference_at(
        &self,
        params: &[f64],
        features: &[Vec<f64>],
        targets: &[f64],
        step: f64,
    ) -> Result<(f64, Vec<f64>)> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!(
                "finite-difference step must be positive, got {step}"
            )));
        }
        let base = self.loss_at(params, features, targets)?;
        let mut grad = Vec::with_capacity(params.len());
        let mut shifted = params.to_vec();
        for k in 0..params.len() {
            shifted[k] = params[k] + step;
            let up = self.loss_at(&shifted, features, targets)?;
            shifted[k] = params[k];
            grad.push((up - base) / step);
        }
        Ok((base, grad))
    }

    /// Forward-difference gradient of the loss with the given step.
    pub fn gradient_finite_difference(
        &self,
        features: &[Vec<f64>],
        targets: &[f64],
        step: f64,
    ) -> Result<Vec<f64>> {
        Ok(self
            .finite_difference_at(&self.parameters, features, targets, step)?
            .1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedResult {
    pub parameters: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub status: Status,
    pub final_loss: f64,
}

/// Fits the model parameters on `train` with L-BFGS, starting from the
/// model's current parameters, and stores the result back into the model.
pub fn train(
    model: &mut QnnModel,
    train: &ScaledSet,
    options: &OptimizerOptions,
    mode: GradientMode,
    fd_step: f64,
) -> Result<TrainedResult> {
    if model.scaling.is_none() {
        return Err(Error::State("training requires a fitted scaling".into()));
    }
    let features = &train.features;
    let targets = &train.targets;
    model.check_batch(features, targets)?;

    // The optimizer asks for f(x) then g(x) at the same point; compute both
    // in one pass and hand the cached gradient over.
    let cache: RefCell<Option<(Vec<f64>, Vec<f64>)>> = RefCell::new(None);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |x: &[f64]| -> Option<(f64, Vec<f64>)> {
        let res = match mode {
            GradientMode::ParameterShift => model.loss_and_shift_gradient_at(x, features, targets),
            GradientMode::FiniteDifference => {
                model.finite_difference_at(x, features, targets, fd_step)
            }
        };
        match res {
            Ok(v) => Some(v),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                None
            }
        }
    };
    let objective = |x: &[f64]| match eval(x) {
        Some((f, g)) => {
            *cache.borrow_mut() = Some((x.to_vec(), g));
            f
        }
        None => f64::NAN,
    };
    let gradient = |x: &[f64]| {
        if let Some((at, g)) = cache.borrow_mut().take() {
            if at == x {
                return g;
            }
        }
        eval(x).map_or_else(|| vec![f64::NAN; x.len()], |(_, g)| g)
    };

    let start = model.parameters.clone();
    let result = minimize(objective, gradient, &start, options);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let result = result?;
    model.parameters = result.best_point.clone();
    Ok(TrainedResult {
        parameters: result.best_point,
        trace: result.trace,
        status: result.status,
        final_loss: result.best_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, DEFAULT_FEATURE_RANGE};
    use approx::assert_abs_diff_eq;

    fn random_batch(n: usize, width: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..n)
            .map(|_| (0..width).map(|_| rng.random_range(0.0..PI)).collect())
            .collect();
        let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (x, y)
    }

    #[test]
    fn config_table_mapping() {
        let q5: QnnConfigId = "QNN-5".parse().unwrap();
        assert_eq!(q5.feature_map(), FeatureMapKind::Z);
        assert_eq!(q5.ansatz(), EntanglementStrategy::ReverseLinear);
        let q9: QnnConfigId = "QNN-9".parse().unwrap();
        assert_eq!(q9.feature_map(), FeatureMapKind::Zz);
        assert_eq!(q9.ansatz(), EntanglementStrategy::Circular);
        let q10: QnnConfigId = "QNN-10".parse().unwrap();
        assert_eq!(q10.ansatz(), EntanglementStrategy::Sca);
        assert!("QNN-13".parse::<QnnConfigId>().is_err());
        assert!("QNN-0".parse::<QnnConfigId>().is_err());
        assert!("knn".parse::<QnnConfigId>().is_err());
        assert_eq!(QnnConfigId::all().count(), 12);
    }

    #[test]
    fn zero_parameters_zero_features_predict_one() {
        let t = build_template(
            FeatureMapKind::Z,
            EntanglementStrategy::Pairwise,
            4,
            &QnnSettings::default(),
        )
        .unwrap();
        let m = QnnModel::new(t, vec![0.0; 16], "t").unwrap();
        assert_abs_diff_eq!(m.predict_scaled(&[0.0; 4]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn initialization_is_seeded_and_bounded() {
        let a = initial_parameters(16, 42);
        assert_eq!(a, initial_parameters(16, 42));
        assert_ne!(a, initial_parameters(16, 43));
        assert!(a.iter().all(|v| (-PI..PI).contains(v)));
    }

    #[test]
    fn loss_reference_values() {
        let t = build_template(
            FeatureMapKind::Z,
            EntanglementStrategy::Linear,
            4,
            &QnnSettings::default(),
        )
        .unwrap();
        let m = QnnModel::new(t, vec![0.0; 16], "t").unwrap();
        let x = vec![vec![0.0; 4]];
        assert_abs_diff_eq!(m.loss_mse(&x, &[1.0]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.loss_mse(&x, &[-1.0]).unwrap(), 4.0, epsilon = 1e-12);
        assert!(m.loss_mse(&[], &[]).is_err());
        assert!(m.loss_mse(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn loss_matches_naive_loop() {
        let settings = QnnSettings::default();
        let m = QnnModel::for_config(QnnConfigId::new(8).unwrap(), 4, &settings).unwrap();
        let (x, y) = random_batch(6, 4, 11);
        let mut acc = 0.0;
        for (row, t) in x.iter().zip(&y) {
            let state = m.template().simulate(row, m.parameters()).unwrap();
            acc += (state.expect_z_all() - t).powi(2);
        }
        assert_abs_diff_eq!(m.loss_mse(&x, &y).unwrap(), acc / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let m =
            QnnModel::for_config(QnnConfigId::new(3).unwrap(), 4, &QnnSettings::default()).unwrap();
        let (x, _) = random_batch(5, 4, 2);
        let y: Vec<f64> = x.iter().map(|r| m.predict_scaled(r).unwrap()).collect();
        for g in m.gradient_parameter_shift(&x, &y).unwrap() {
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn shift_gradient_matches_central_difference() {
        let settings = QnnSettings::default();
        for id in [1u8, 4, 7, 12] {
            let m = QnnModel::for_config(QnnConfigId::new(id).unwrap(), 4, &settings).unwrap();
            let (x, y) = random_batch(8, 4, id as u64);
            let g = m.gradient_parameter_shift(&x, &y).unwrap();
            let h = 1e-6;
            for k in 0..g.len() {
                let mut p = m.parameters().to_vec();
                p[k] += h;
                let up = m.loss_at(&p, &x, &y).unwrap();
                p[k] -= 2.0 * h;
                let down = m.loss_at(&p, &x, &y).unwrap();
                let fd = (up - down) / (2.0 * h);
                assert!(
                    (g[k] - fd).abs() < 1e-6,
                    "QNN-{id} slot {k}: {} vs {fd}",
                    g[k]
                );
            }
        }
    }

    #[test]
    fn symmetric_point_has_zero_component() {
        // One qubit, RY(t) on |+>: f(t) = -sin t, so at t = pi/2
        // f(t + pi/2) = f(t - pi/2) and the shift gradient vanishes.
        let map = build_z_feature_map(1, 1).unwrap();
        let ansatz = CircuitTemplate::new(
            1,
            vec![GateSpec::Ry {
                qubit: 0,
                angle: Angle::Parameter(0),
            }],
            0,
            1,
        )
        .unwrap();
        let t = compose(&map, &ansatz).unwrap();
        let m = QnnModel::new(t, vec![FRAC_PI_2], "t").unwrap();
        let x = vec![vec![0.0]];
        let g = m.gradient_parameter_shift(&x, &[0.3]).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn finite_difference_step_validation_and_agreement() {
        let m =
            QnnModel::for_config(QnnConfigId::new(2).unwrap(), 4, &QnnSettings::default()).unwrap();
        let (x, y) = random_batch(4, 4, 9);
        assert!(m.gradient_finite_difference(&x, &y, 0.0).is_err());
        assert!(m.gradient_finite_difference(&x, &y, -1.0).is_err());
        let fd = m.gradient_finite_difference(&x, &y, 1e-8).unwrap();
        let ps = m.gradient_parameter_shift(&x, &y).unwrap();
        for (a, b) in fd.iter().zip(&ps) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn physical_prediction_needs_scaling() {
        let ds = generate_synthetic(100, 4).unwrap();
        let m =
            QnnModel::for_config(QnnConfigId::new(1).unwrap(), 4, &QnnSettings::default()).unwrap();
        assert!(matches!(
            m.predict_physical(&ds.records[0].features()),
            Err(Error::State(_))
        ));
        let spec = ScalingSpec::fit(&ds, DEFAULT_FEATURE_RANGE).unwrap();
        let (lo, hi) = (spec.target.min, spec.target.max);
        let m = m.with_scaling(spec);
        for r in &ds.records {
            let p = m.predict_physical(&r.features()).unwrap();
            assert!(p >= lo - 1e-9 && p <= hi + 1e-9);
        }
    }

    #[test]
    fn rejects_parameter_on_phase_gate() {
        let t = CircuitTemplate::new(
            1,
            vec![GateSpec::P {
                qubit: 0,
                angle: Angle::Parameter(0),
            }],
            0,
            1,
        )
        .unwrap();
        assert!(QnnModel::new(t, vec![0.0], "bad").is_err());
    }

    #[test]
    fn training_already_optimal_stops_immediately() {
        let ds = generate_synthetic(60, 8).unwrap();
        let spec = ScalingSpec::fit(&ds, DEFAULT_FEATURE_RANGE).unwrap();
        let mut set = spec.apply(&ds);
        let mut m = QnnModel::for_config(QnnConfigId::new(5).unwrap(), 4, &QnnSettings::default())
            .unwrap()
            .with_scaling(spec);
        set.targets = set
            .features
            .iter()
            .map(|x| m.predict_scaled(x).unwrap())
            .collect();
        let res = train(
            &mut m,
            &set,
            &OptimizerOptions::default(),
            GradientMode::ParameterShift,
            1e-8,
        )
        .unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(res.trace.len() <= 2);
        assert!(res.final_loss < 1e-20);
    }

    #[test]
    fn training_trace_is_capped_and_monotone() {
        let ds = generate_synthetic(80, 3).unwrap();
        let spec = ScalingSpec::fit(&ds, DEFAULT_FEATURE_RANGE).unwrap();
        let set = spec.apply(&ds);
        let mut m = QnnModel::for_config(QnnConfigId::new(1).unwrap(), 4, &QnnSettings::default())
            .unwrap()
            .with_scaling(spec);
        let opts = OptimizerOptions {
            max_iterations: 6,
            ..Default::default()
        };
        let res = train(&mut m, &set, &opts, GradientMode::ParameterShift, 1e-8).unwrap();
        assert!(res.trace.len() <= 7);
        for w in res.trace.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        assert_eq!(m.parameters(), res.parameters.as_slice());
        assert!(res.final_loss < res.trace[0].value);
    }
}
