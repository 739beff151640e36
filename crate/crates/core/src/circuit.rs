//! Gate-level circuit templates: Z / ZZ feature maps, the RY ansatz with six
//! entanglement layouts, and composition of the two.
//!
//! A template keeps its angles symbolic. Feature angles are expressions over
//! the input vector and parameter angles index into the trainable vector;
//! both are resolved only when the template is bound.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Statevector, Unitary2x2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementStrategy {
    Linear,
    Full,
    Circular,
    Sca,
    ReverseLinear,
    Pairwise,
}

impl EntanglementStrategy {
    /// Table order used by the QNN configuration matrix.
    pub const ALL: [EntanglementStrategy; 6] = [
        EntanglementStrategy::Linear,
        EntanglementStrategy::Full,
        EntanglementStrategy::Circular,
        EntanglementStrategy::Sca,
        EntanglementStrategy::ReverseLinear,
        EntanglementStrategy::Pairwise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntanglementStrategy::Linear => "linear",
            EntanglementStrategy::Full => "full",
            EntanglementStrategy::Circular => "circular",
            EntanglementStrategy::Sca => "sca",
            EntanglementStrategy::ReverseLinear => "reverse_linear",
            EntanglementStrategy::Pairwise => "pairwise",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            EntanglementStrategy::Linear => "Linear",
            EntanglementStrategy::Full => "Full",
            EntanglementStrategy::Circular => "Circular",
            EntanglementStrategy::Sca => "SCA",
            EntanglementStrategy::ReverseLinear => "Reverse Linear",
            EntanglementStrategy::Pairwise => "Pairwise",
        }
    }
}

impl fmt::Display for EntanglementStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntanglementStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntanglementStrategy::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown entanglement strategy `{s}`")))
    }
}

/// CX `(control, target)` pairs for one entangling block.
///
/// `block_index` only matters for SCA, whose ring shifts by one position
/// per block and swaps control/target on odd blocks.
pub fn entangler_pairs(
    strategy: EntanglementStrategy,
    n_qubits: usize,
    block_index: usize,
) -> Result<Vec<(usize, usize)>> {
    if n_qubits < 2 {
        return Err(Error::invalid(format!(
            "entangling layer needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let n = n_qubits;
    let linear = || (0..n - 1).map(|i| (i, i + 1));
    let circular = || std::iter::once((n - 1, 0)).chain(linear());
    let pairs = match strategy {
        EntanglementStrategy::Linear => linear().collect(),
        EntanglementStrategy::ReverseLinear => linear().rev().collect(),
        EntanglementStrategy::Full => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        // For n == 2 the ring closure (1,0) is kept even though it reverses (0,1).
        EntanglementStrategy::Circular => circular().collect(),
        EntanglementStrategy::Pairwise => linear()
            .filter(|(i, _)| i % 2 == 0)
            .chain(linear().filter(|(i, _)| i % 2 == 1))
            .collect(),
        EntanglementStrategy::Sca => {
            let shift = block_index % n;
            let swap = block_index % 2 == 1;
            circular()
                .map(|(c, t)| ((c + shift) % n, (t + shift) % n))
                .map(|(c, t)| if swap { (t, c) } else { (c, t) })
                .collect()
        }
    };
    Ok(pairs)
}

/// Angle expression over the input features.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureAngle {
    /// `factor * x[slot]`
    Scaled { slot: usize, factor: f64 },
    /// `2 (pi - x[a]) (pi - x[b])`
    Interaction { a: usize, b: usize },
}

impl FeatureAngle {
    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            FeatureAngle::Scaled { slot, factor } => factor * x[slot],
            FeatureAngle::Interaction { a, b } => 2.0 * (PI - x[a]) * (PI - x[b]),
        }
    }

    fn slots(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            FeatureAngle::Scaled { slot, .. } => (slot, None),
            FeatureAngle::Interaction { a, b } => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    fn offset(self, by: usize) -> Self {
        match self {
            FeatureAngle::Scaled { slot, factor } => FeatureAngle::Scaled {
                slot: slot + by,
                factor,
            },
            FeatureAngle::Interaction { a, b } => FeatureAngle::Interaction {
                a: a + by,
                b: b + by,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Constant(f64),
    Feature(FeatureAngle),
    Parameter(usize),
}

impl Angle {
    fn resolve(&self, features: &[f64], params: &[f64]) -> f64 {
        match self {
            Angle::Constant(v) => *v,
            Angle::Feature(f) => f.eval(features),
            Angle::Parameter(k) => params[*k],
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Constant(v) => write!(f, "{v}"),
            Angle::Feature(FeatureAngle::Scaled { slot, factor }) => {
                write!(f, "{factor}*x{slot}")
            }
            Angle::Feature(FeatureAngle::Interaction { a, b }) => {
                write!(f, "2*(pi-x{a})*(pi-x{b})")
            }
            Angle::Parameter(k) => write!(f, "t{k}"),
        }
    }
}

/// One templated gate. H and CX carry no angle by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateSpec {
    H { qubit: usize },
    P { qubit: usize, angle: Angle },
    Ry { qubit: usize, angle: Angle },
    Cx { control: usize, target: usize },
}

impl GateSpec {
    fn qubits(&self) -> [usize; 2] {
        match *self {
            GateSpec::H { qubit } | GateSpec::P { qubit, .. } | GateSpec::Ry { qubit, .. } => {
                [qubit, qubit]
            }
            GateSpec::Cx { control, target } => [control, target],
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            GateSpec::P { angle, .. } | GateSpec::Ry { angle, .. } => Some(angle),
            _ => None,
        }
    }

    fn map_angle(self, f: impl Fn(Angle) -> Angle) -> Self {
        match self {
            GateSpec::P { qubit, angle } => GateSpec::P {
                qubit,
                angle: f(angle),
            },
            GateSpec::Ry { qubit, angle } => GateSpec::Ry {
                qubit,
                angle: f(angle),
            },
            other => other,
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::H { qubit } => write!(f, "H q{qubit}"),
            GateSpec::P { qubit, angle } => write!(f, "P({angle}) q{qubit}"),
            GateSpec::Ry { qubit, angle } => write!(f, "RY({angle}) q{qubit}"),
            GateSpec::Cx { control, target } => write!(f, "CX q{control},q{target}"),
        }
    }
}

/// A gate with its angle resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundGate {
    H(usize),
    P(usize, f64),
    Ry(usize, f64),
    Cx(usize, usize),
}

impl BoundGate {
    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        match *self {
            BoundGate::H(q) => state.apply_1q(&Unitary2x2::hadamard(), q),
            BoundGate::P(q, theta) => state.apply_phase(theta, q),
            BoundGate::Ry(q, theta) => state.apply_1q(&Unitary2x2::ry(theta), q),
            BoundGate::Cx(c, t) => state.apply_cx(c, t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitTemplate {
    n_qubits: usize,
    gates: Vec<GateSpec>,
    n_feature_slots: usize,
    n_parameter_slots: usize,
}

impl CircuitTemplate {
    /// Validates qubit indices and that each slot family is dense in
    /// `0..count`.
    pub fn new(
        n_qubits: usize,
        gates: Vec<GateSpec>,
        n_feature_slots: usize,
        n_parameter_slots: usize,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > Statevector::MAX_QUBITS {
            return Err(Error::invalid(format!("bad qubit count {n_qubits}")));
        }
        for g in &gates {
            let [a, b] = g.qubits();
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::invalid(format!(
                    "gate `{g}` addresses a qubit outside 0..{n_qubits}"
                )));
            }
            if let GateSpec::Cx { control, target } = g {
                if control == target {
                    return Err(Error::invalid(format!("gate `{g}` has control == target")));
                }
            }
        }
        let template = CircuitTemplate {
            n_qubits,
            gates,
            n_feature_slots,
            n_parameter_slots,
        };
        let (features, params) = template.referenced_slots();
        if features != (0..n_feature_slots).collect::<BTreeSet<_>>() {
            return Err(Error::invalid(format!(
                "feature slots {features:?} are not dense in 0..{n_feature_slots}"
            )));
        }
        if params != (0..n_parameter_slots).collect::<BTreeSet<_>>() {
            return Err(Error::invalid(format!(
                "parameter slots {params:?} are not dense in 0..{n_parameter_slots}"
            )));
        }
        Ok(template)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn n_feature_slots(&self) -> usize {
        self.n_feature_slots
    }

    pub fn n_parameter_slots(&self) -> usize {
        self.n_parameter_slots
    }

    /// Distinct (feature, parameter) slot indices referenced by the gates.
    pub fn referenced_slots(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let mut features = BTreeSet::new();
        let mut params = BTreeSet::new();
        for angle in self.gates.iter().filter_map(GateSpec::angle) {
            match angle {
                Angle::Feature(f) => features.extend(f.slots()),
                Angle::Parameter(k) => {
                    params.insert(*k);
                }
                Angle::Constant(_) => {}
            }
        }
        (features, params)
    }

    /// Number of leading gates that reference no trainable parameter.
    pub fn parameter_free_prefix(&self) -> usize {
        self.gates
            .iter()
            .position(|g| matches!(g.angle(), Some(Angle::Parameter(_))))
            .unwrap_or(self.gates.len())
    }

    pub fn count_cx(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, GateSpec::Cx { .. }))
            .count()
    }

    fn check_lengths(&self, features: &[f64], params: &[f64]) -> Result<()> {
        if features.len() != self.n_feature_slots {
            return Err(Error::invalid(format!(
                "expected {} features, got {}",
                self.n_feature_slots,
                features.len()
            )));
        }
        if params.len() != self.n_parameter_slots {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_parameter_slots,
                params.len()
            )));
        }
        Ok(())
    }

    pub fn bind(&self, features: &[f64], params: &[f64]) -> Result<Vec<BoundGate>> {
        self.check_lengths(features, params)?;
        Ok(self
            .gates
            .iter()
            .map(|g| bind_gate(g, features, params))
            .collect())
    }

    /// Applies gates `range` of the template to `state`. Lengths are not
    /// rechecked; callers go through [`CircuitTemplate::simulate`] or have
    /// validated them already.
    pub(crate) fn run_range(
        &self,
        state: &mut Statevector,
        range: std::ops::Range<usize>,
        features: &[f64],
        params: &[f64],
    ) -> Result<()> {
        for g in &self.gates[range] {
            bind_gate(g, features, params).apply(state)?;
        }
        Ok(())
    }

    /// Final state after running the bound circuit from `|0...0>`.
    pub fn simulate(&self, features: &[f64], params: &[f64]) -> Result<Statevector> {
        self.check_lengths(features, params)?;
        let mut state = Statevector::zero(self.n_qubits)?;
        self.run_range(&mut state, 0..self.gates.len(), features, params)?;
        Ok(state)
    }

    /// `<Z x ... x Z>` of the bound circuit applied to `|0...0>`.
    pub fn evaluate(&self, features: &[f64], params: &[f64]) -> Result<f64> {
        Ok(self.simulate(features, params)?.expect_z_all())
    }

    /// One line per gate, e.g. `P(2*x0) q1` or `CX q0,q2`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

fn bind_gate(g: &GateSpec, features: &[f64], params: &[f64]) -> BoundGate {
    match g {
        GateSpec::H { qubit } => BoundGate::H(*qubit),
        GateSpec::P { qubit, angle } => BoundGate::P(*qubit, angle.resolve(features, params)),
        GateSpec::Ry { qubit, angle } => BoundGate::Ry(*qubit, angle.resolve(features, params)),
        GateSpec::Cx { control, target } => BoundGate::Cx(*control, *target),
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 1 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    Ok(())
}

fn encoding_layer(n_qubits: usize, gates: &mut Vec<GateSpec>) {
    gates.extend((0..n_qubits).map(|qubit| GateSpec::H { qubit }));
    gates.extend((0..n_qubits).map(|qubit| GateSpec::P {
        qubit,
        angle: Angle::Feature(FeatureAngle::Scaled {
            slot: qubit,
            factor: 2.0,
        }),
    }));
}

/// `reps` rounds of `H` then `P(2 x_i)` on every qubit.
pub fn build_z_feature_map(n_qubits: usize, reps: usize) -> Result<CircuitTemplate> {
    check_reps(reps)?;
    let mut gates = Vec::with_capacity(2 * n_qubits * reps);
    for _ in 0..reps {
        encoding_layer(n_qubits, &mut gates);
    }
    CircuitTemplate::new(n_qubits, gates, n_qubits, 0)
}

/// Z-map rounds followed by `CX . P(2 (pi - x_i)(pi - x_j)) . CX` on each
/// entangled pair, with the phase on the target wire.
pub fn build_zz_feature_map(
    n_qubits: usize,
    reps: usize,
    entanglement: EntanglementStrategy,
) -> Result<CircuitTemplate> {
    check_reps(reps)?;
    let mut gates = Vec::new();
    for rep in 0..reps {
        encoding_layer(n_qubits, &mut gates);
        for (i, j) in entangler_pairs(entanglement, n_qubits, rep)? {
            gates.push(GateSpec::Cx {
                control: i,
                target: j,
            });
            gates.push(GateSpec::P {
                qubit: j,
                angle: Angle::Feature(FeatureAngle::Interaction { a: i, b: j }),
            });
            gates.push(GateSpec::Cx {
                control: i,
                target: j,
            });
        }
    }
    CircuitTemplate::new(n_qubits, gates, n_qubits, 0)
}

/// RY rotation layer and CX entangling block, `reps` times, then a closing
/// rotation layer. Parameters are numbered layer-major, qubit-minor.
pub fn build_ansatz(
    n_qubits: usize,
    reps: usize,
    strategy: EntanglementStrategy,
) -> Result<CircuitTemplate> {
    check_reps(reps)?;
    let mut gates = Vec::new();
    let rotation = |layer: usize, gates: &mut Vec<GateSpec>| {
        gates.extend((0..n_qubits).map(|qubit| GateSpec::Ry {
            qubit,
            angle: Angle::Parameter(layer * n_qubits + qubit),
        }));
    };
    for block in 0..reps {
        rotation(block, &mut gates);
        for (control, target) in entangler_pairs(strategy, n_qubits, block)? {
            gates.push(GateSpec::Cx { control, target });
        }
    }
    rotation(reps, &mut gates);
    CircuitTemplate::new(n_qubits, gates, 0, n_qubits * (reps + 1))
}

/// Feature map followed by ansatz. Feature slots come from the first
/// template and parameter slots from the second, each renumbered after
/// any slots of the same kind already present in the other.
pub fn compose(first: &CircuitTemplate, second: &CircuitTemplate) -> Result<CircuitTemplate> {
    if first.n_qubits != second.n_qubits {
        return Err(Error::invalid(format!(
            "cannot compose {}-qubit and {}-qubit templates",
            first.n_qubits, second.n_qubits
        )));
    }
    let feature_offset = first.n_feature_slots;
    let param_offset = first.n_parameter_slots;
    let mut gates = first.gates.clone();
    gates.extend(second.gates.iter().map(|g| {
        g.map_angle(|a| match a {
            Angle::Feature(f) => Angle::Feature(f.offset(feature_offset)),
            Angle::Parameter(k) => Angle::Parameter(k + param_offset),
            c => c,
        })
    }));
    CircuitTemplate::new(
        first.n_qubits,
        gates,
        first.n_feature_slots + second.n_feature_slots,
        first.n_parameter_slots + second.n_parameter_slots,
    )
}
