//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # free Dirac packet
//! [equation]
//! name = dirac-free
//!
//! [grid]
//! points = 64
//! length = 20
//!
//! [time]
//! end = 1
//! step = 0.01
//! ```
//!
//! Sections are `[equation]`, `[grid]`, `[time]`, `[initial]`, `[potential]`,
//! `[trivialization]` and `[output]`; only the first three are required.
//! Everything after `#` on a line is ignored.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use relbundle_core::evolution::Scheme;
use relbundle_core::reduction::PhysicalParams;
use relbundle_core::{Boundary, C64};

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationKind {
    Zero,
    SchrodingerFree,
    Schrodinger,
    DiracFree,
    Dirac,
    KgCanonical,
    KgNonrel,
    Kg5d,
    Maxwell,
}

impl EquationKind {
    pub const ALL: [EquationKind; 9] = [
        EquationKind::Zero,
        EquationKind::SchrodingerFree,
        EquationKind::Schrodinger,
        EquationKind::DiracFree,
        EquationKind::Dirac,
        EquationKind::KgCanonical,
        EquationKind::KgNonrel,
        EquationKind::Kg5d,
        EquationKind::Maxwell,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            EquationKind::Zero => "zero",
            EquationKind::SchrodingerFree => "schrodinger-free",
            EquationKind::Schrodinger => "schrodinger",
            EquationKind::DiracFree => "dirac-free",
            EquationKind::Dirac => "dirac",
            EquationKind::KgCanonical => "kg-canonical",
            EquationKind::KgNonrel => "kg-nonrel",
            EquationKind::Kg5d => "kg-5d",
            EquationKind::Maxwell => "maxwell",
        }
    }

    /// Equations that ignore the `[potential]` section.
    pub fn is_free(&self) -> bool {
        matches!(
            self,
            EquationKind::Zero
                | EquationKind::SchrodingerFree
                | EquationKind::DiracFree
                | EquationKind::Kg5d
                | EquationKind::Maxwell
        )
    }
}

impl FromStr for EquationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown equation `{s}` (expected one of {})", labels(&Self::ALL.map(|k| k.label()))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec {
    pub kind: EquationKind,
    pub params: PhysicalParams,
    /// Component count, only configurable for `zero`.
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub length: f64,
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub scheme: Scheme,
}

impl TimeSpec {
    pub fn steps(&self) -> usize {
        ((self.end - self.start) / self.step).round() as usize
    }
}

/// Which internal vector a plane wave or packet carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spinor {
    /// Positive-frequency branch of the equation's symbol.
    Positive,
    Negative,
    /// Unit vector along one component.
    Component(usize),
}

impl fmt::Display for Spinor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spinor::Positive => f.write_str("positive"),
            Spinor::Negative => f.write_str("negative"),
            Spinor::Component(i) => write!(f, "component-{i}"),
        }
    }
}

impl FromStr for Spinor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Spinor::Positive),
            "negative" => Ok(Spinor::Negative),
            _ => s
                .strip_prefix("component-")
                .and_then(|i| i.parse().ok())
                .map(Spinor::Component)
                .ok_or_else(|| format!("unknown spinor `{s}` (expected positive, negative or component-<i>)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    /// `e^{ik x}` with `k = 2π·mode/L`.
    PlaneWave { mode: i64, spinor: Spinor },
    Gaussian {
        width: f64,
        center: f64,
        wavenumber: f64,
        spinor: Spinor,
    },
    /// Flattened values, component-major.
    Samples(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    None,
    Constant { scalar: f64, vector: f64 },
    /// `eφ = ½mω²(x − x₀)²`.
    Harmonic { frequency: f64, center: f64 },
    Samples { scalar: Vec<f64>, vector: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrivializationSpec {
    Identity,
    /// Rotation by `angle` in the plane of the first two components, or a
    /// phase `e^{i·angle}` for scalar fields.
    ConstantUnitary { angle: f64 },
    /// Phase `θ(t, x) = rate·t + amplitude·sin(wavenumber·x)` on the first component.
    PhaseField { rate: f64, amplitude: f64, wavenumber: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    Position,
    Momentum,
    Energy,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 3] = [ObservableKind::Position, ObservableKind::Momentum, ObservableKind::Energy];

    pub fn label(&self) -> &'static str {
        match self {
            ObservableKind::Position => "position",
            ObservableKind::Momentum => "momentum",
            ObservableKind::Energy => "energy",
        }
    }
}

impl FromStr for ObservableKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown observable `{s}` (expected one of {})", labels(&Self::ALL.map(|k| k.label()))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    /// Snapshot every this many steps.
    pub every: usize,
    pub observables: Vec<ObservableKind>,
    pub directory: String,
    /// Write the state CSV.
    pub state: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub equation: EquationSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub initial: InitialSpec,
    pub potential: PotentialSpec,
    pub trivialization: TrivializationSpec,
    pub output: OutputSpec,
}

impl RunConfig {
    /// Components per grid point of the configured equation.
    pub fn components(&self) -> usize {
        match self.equation.kind {
            EquationKind::Zero => self.equation.components,
            EquationKind::SchrodingerFree | EquationKind::Schrodinger => 1,
            EquationKind::KgCanonical | EquationKind::KgNonrel => 2,
            EquationKind::DiracFree | EquationKind::Dirac | EquationKind::Maxwell => 4,
            EquationKind::Kg5d => 5,
        }
    }

    /// Canonical text form; parsing it gives back `self`.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        let e = &self.equation;
        let _ = writeln!(s, "[equation]\nname = {}", e.kind.label());
        let p = &e.params;
        let _ = writeln!(s, "mass = {:?}\ncharge = {:?}\nhbar = {:?}\nc = {:?}", p.mass, p.charge, p.hbar, p.c);
        if e.kind == EquationKind::Zero {
            let _ = writeln!(s, "components = {}", e.components);
        }
        let g = &self.grid;
        let _ = writeln!(s, "\n[grid]\npoints = {}\nlength = {:?}\nboundary = {}", g.points, g.length, g.boundary.as_str());
        let t = &self.time;
        let _ = writeln!(
            s,
            "\n[time]\nstart = {:?}\nend = {:?}\nstep = {:?}\nscheme = {}",
            t.start, t.end, t.step, t.scheme
        );
        s.push_str("\n[initial]\n");
        match &self.initial {
            InitialSpec::PlaneWave { mode, spinor } => {
                let _ = writeln!(s, "kind = plane-wave\nmode = {mode}\nspinor = {spinor}");
            }
            InitialSpec::Gaussian {
                width,
                center,
                wavenumber,
                spinor,
            } => {
                let _ = writeln!(
                    s,
                    "kind = gaussian\nwidth = {width:?}\ncenter = {center:?}\nwavenumber = {wavenumber:?}\nspinor = {spinor}"
                );
            }
            InitialSpec::Samples(v) => {
                let items: Vec<String> = v.iter().map(|z| format!("{:?}:{:?}", z.re, z.im)).collect();
                let _ = writeln!(s, "kind = samples\nsamples = {}", items.join(", "));
            }
        }
        s.push_str("\n[potential]\n");
        match &self.potential {
            PotentialSpec::None => s.push_str("kind = none\n"),
            PotentialSpec::Constant { scalar, vector } => {
                let _ = writeln!(s, "kind = constant\nscalar = {scalar:?}\nvector = {vector:?}");
            }
            PotentialSpec::Harmonic { frequency, center } => {
                let _ = writeln!(s, "kind = harmonic\nfrequency = {frequency:?}\ncenter = {center:?}");
            }
            PotentialSpec::Samples { scalar, vector } => {
                let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
                let _ = writeln!(s, "kind = samples\nscalar-samples = {}\nvector-samples = {}", join(scalar), join(vector));
            }
        }
        s.push_str("\n[trivialization]\n");
        match &self.trivialization {
            TrivializationSpec::Identity => s.push_str("kind = identity\n"),
            TrivializationSpec::ConstantUnitary { angle } => {
                let _ = writeln!(s, "kind = constant-unitary\nangle = {angle:?}");
            }
            TrivializationSpec::PhaseField {
                rate,
                amplitude,
                wavenumber,
            } => {
                let _ = writeln!(
                    s,
                    "kind = phase-field\nrate = {rate:?}\namplitude = {amplitude:?}\nwavenumber = {wavenumber:?}"
                );
            }
        }
        let o = &self.output;
        let obs: Vec<&str> = o.observables.iter().map(|k| k.label()).collect();
        let _ = writeln!(
            s,
            "\n[output]\nevery = {}\nobservables = {}\ndirectory = {}\nstate = {}",
            o.every,
            obs.join(", "),
            o.directory,
            o.state
        );
        s
    }
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("equation", &["name", "mass", "charge", "hbar", "c", "components"]),
    ("grid", &["points", "length", "boundary"]),
    ("time", &["start", "end", "step", "scheme"]),
    ("initial", &["kind", "mode", "spinor", "width", "center", "wavenumber", "samples"]),
    ("potential", &["kind", "scalar", "vector", "frequency", "center", "scalar-samples", "vector-samples"]),
    ("trivialization", &["kind", "angle", "rate", "amplitude", "wavenumber"]),
    ("output", &["every", "observables", "directory", "state"]),
];

fn labels(items: &[&str]) -> String {
    items.join(", ")
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
    used: bool,
}

#[derive(Debug)]
struct Section {
    name: &'static str,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(&str, usize, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.as_str(), e.line, e.column)
        })
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        let name = self.name;
        match self.take(key) {
            None => Ok(None),
            Some((v, line, col)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::new(line, col, format!("[{name}] {key}: expected {what}, got `{v}`"))),
        }
    }

    fn custom<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        let name = self.name;
        match self.take(key) {
            None => Ok(None),
            Some((v, line, col)) => f(v)
                .map(Some)
                .map_err(|m| ConfigError::new(line, col, format!("[{name}] {key}: {m}"))),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                let (line, col) = self.position(key);
                return Err(ConfigError::new(line, col, format!("[{}] {key} must be finite", self.name)));
            }
        }
        Ok(v)
    }

    fn required<T>(&self, key: &str, v: Option<T>) -> Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::new(self.line, 1, format!("[{}] is missing required key `{key}`", self.name)))
    }

    fn position(&self, key: &str) -> (usize, usize) {
        self.entries.get(key).map(|e| (e.line, e.column)).unwrap_or((self.line, 1))
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let (line, col) = self.position(key);
        ConfigError::new(line, col, format!("[{}] {}", self.name, message.into()))
    }

    /// Keys that are valid in the section but meaningless for the chosen kind.
    fn reject_unused(&self, context: &str) -> Result<(), ConfigError> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            None => Ok(()),
            Some((k, e)) => Err(ConfigError::new(
                e.line,
                e.column,
                format!("[{}] key `{k}` does not apply to {context}", self.name),
            )),
        }
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<&'static str, Section>, ConfigError> {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(line, indent + trimmed.len(), "expected `]` to close the section header"))?
                .trim();
            let (known, _) = SECTIONS.iter().find(|(s, _)| *s == name).ok_or_else(|| {
                ConfigError::new(
                    line,
                    indent + 1,
                    format!("unknown section `[{name}]` (expected one of {})", labels(&SECTIONS.map(|s| s.0))),
                )
            })?;
            if sections.contains_key(known) {
                return Err(ConfigError::new(line, indent, format!("section `[{name}]` appears twice")));
            }
            sections.insert(
                known,
                Section {
                    name: known,
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(known);
            continue;
        }
        let eq = trimmed
            .find('=')
            .ok_or_else(|| ConfigError::new(line, indent, "expected `key = value` or a `[section]` header"))?;
        let key = trimmed[..eq].trim();
        let value = trimmed[eq + 1..].trim();
        let section = current.ok_or_else(|| ConfigError::new(line, indent, "key appears before any `[section]` header"))?;
        let valid_key = key.starts_with(|c: char| c.is_ascii_lowercase())
            && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if !valid_key {
            return Err(ConfigError::new(
                line,
                indent,
                format!("malformed key `{key}`: keys are lowercase letters, digits and hyphens"),
            ));
        }
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::new(
                line,
                indent,
                format!("unknown key `{key}` in [{section}] (expected one of {})", labels(allowed)),
            ));
        }
        if value.is_empty() && key != "observables" {
            return Err(ConfigError::new(line, indent + eq + 1, format!("key `{key}` has no value")));
        }
        let entries = &mut sections.get_mut(section).expect("section was inserted").entries;
        if entries.contains_key(key) {
            return Err(ConfigError::new(line, indent, format!("key `{key}` repeated in [{section}]")));
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
                column: indent,
                used: false,
            },
        );
    }
    Ok(sections)
}

fn complex_item(s: &str) -> Result<C64, String> {
    let bad = || format!("expected `re` or `re:im`, got `{s}`");
    match s.split_once(':') {
        None => s.trim().parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad()),
        Some((re, im)) => Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?)),
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|x| x.trim()).filter(|x| !x.is_empty()).map(item).collect()
}

fn real_item(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a finite number, got `{s}`"))
}

/// Parses and fully resolves a run config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut sections = tokenize(text)?;
    let empty = |name: &'static str| Section {
        name,
        line: 0,
        entries: BTreeMap::new(),
    };
    let missing = |name: &str| ConfigError::new(0, 0, format!("missing required section `[{name}]`"));
    let mut eq = sections.remove("equation").ok_or_else(|| missing("equation"))?;
    let mut gr = sections.remove("grid").ok_or_else(|| missing("grid"))?;
    let mut tm = sections.remove("time").ok_or_else(|| missing("time"))?;
    let mut init = sections.remove("initial").unwrap_or_else(|| empty("initial"));
    let mut pot = sections.remove("potential").unwrap_or_else(|| empty("potential"));
    let mut triv = sections.remove("trivialization").unwrap_or_else(|| empty("trivialization"));
    let mut out = sections.remove("output").unwrap_or_else(|| empty("output"));

    // [equation]
    let kind = eq.custom("name", |s| s.parse::<EquationKind>())?;
    let kind = eq.required("name", kind)?;
    let d = PhysicalParams::default();
    let params = PhysicalParams {
        mass: eq.number("mass")?.unwrap_or(d.mass),
        charge: eq.number("charge")?.unwrap_or(d.charge),
        hbar: eq.number("hbar")?.unwrap_or(d.hbar),
        c: eq.number("c")?.unwrap_or(d.c),
    };
    params.validate().map_err(|e| eq.error("mass", e.to_string()))?;
    let components = if kind == EquationKind::Zero {
        let m: usize = eq.parsed("components", "a positive integer")?.unwrap_or(1);
        if m == 0 {
            return Err(eq.error("components", "components must be positive"));
        }
        m
    } else {
        1
    };
    eq.reject_unused(&format!("equation `{}`", kind.label()))?;
    if kind == EquationKind::KgNonrel && params.mass == 0.0 {
        return Err(eq.error("mass", "kg-nonrel needs a positive mass"));
    }
    let equation = EquationSpec { kind, params, components };

    // [grid]
    let points = gr.parsed::<usize>("points", "a positive integer")?;
    let points = gr.required("points", points)?;
    let length = gr.number("length")?;
    let length = gr.required("length", length)?;
    let boundary = gr
        .custom("boundary", |s| match s {
            "periodic" => Ok(Boundary::Periodic),
            "reflecting" => Ok(Boundary::Reflecting),
            _ => Err(format!("unknown boundary `{s}` (expected periodic or reflecting)")),
        })?
        .unwrap_or(Boundary::Periodic);
    if points < relbundle_core::grid::MIN_POINTS {
        return Err(gr.error("points", format!("need at least {} points", relbundle_core::grid::MIN_POINTS)));
    }
    if boundary == Boundary::Periodic && !points.is_power_of_two() {
        return Err(gr.error("points", format!("periodic grids need a power of two, got {points}")));
    }
    if length <= 0.0 {
        return Err(gr.error("length", "length must be positive"));
    }
    let grid = GridSpec { points, length, boundary };

    // [time]
    let start = tm.number("start")?.unwrap_or(0.0);
    let end = tm.number("end")?;
    let end = tm.required("end", end)?;
    let step = tm.number("step")?;
    let step = tm.required("step", step)?;
    let scheme = tm.custom("scheme", |s| s.parse::<Scheme>().map_err(|e| e.to_string()))?.unwrap_or_default();
    if step <= 0.0 {
        return Err(tm.error("step", "step must be positive"));
    }
    if end < start {
        return Err(tm.error("end", "end must not precede start"));
    }
    let ratio = (end - start) / step;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        return Err(tm.error("step", format!("end − start = {} is not a whole number of steps", end - start)));
    }
    let time = TimeSpec { start, end, step, scheme };

    let m = match kind {
        EquationKind::Zero => components,
        EquationKind::SchrodingerFree | EquationKind::Schrodinger => 1,
        EquationKind::KgCanonical | EquationKind::KgNonrel => 2,
        EquationKind::Kg5d => 5,
        _ => 4,
    };

    // [initial]
    let ikind = init.take("kind").map(|(v, _, _)| v.to_string()).unwrap_or_else(|| "gaussian".into());
    let spinor = |s: &mut Section| -> Result<Spinor, ConfigError> {
        let sp = s.custom("spinor", |v| v.parse::<Spinor>())?.unwrap_or(Spinor::Positive);
        if let Spinor::Component(i) = sp {
            if i >= m {
                return Err(s.error("spinor", format!("component {i} out of range for {m} components")));
            }
        }
        Ok(sp)
    };
    let initial = match ikind.as_str() {
        "plane-wave" => {
            let mode = init.parsed::<i64>("mode", "an integer")?.unwrap_or(1);
            InitialSpec::PlaneWave {
                mode,
                spinor: spinor(&mut init)?,
            }
        }
        "gaussian" => {
            let width = init.number("width")?.unwrap_or(length / 16.0);
            if width <= 0.0 {
                return Err(init.error("width", "width must be positive"));
            }
            InitialSpec::Gaussian {
                width,
                center: init.number("center")?.unwrap_or(length / 2.0),
                wavenumber: init.number("wavenumber")?.unwrap_or(0.0),
                spinor: spinor(&mut init)?,
            }
        }
        "samples" => {
            let v = init.custom("samples", |s| list(s, complex_item))?;
            let v = init.required("samples", v)?;
            if v.len() != points * m {
                return Err(init.error(
                    "samples",
                    format!("expected {} values ({points} points × {m} components), got {}", points * m, v.len()),
                ));
            }
            InitialSpec::Samples(v)
        }
        other => {
            return Err(init.error(
                "kind",
                format!("unknown initial kind `{other}` (expected plane-wave, gaussian or samples)"),
            ))
        }
    };
    init.reject_unused(&format!("initial kind `{ikind}`"))?;

    // [potential]
    let pkind = pot.take("kind").map(|(v, _, _)| v.to_string()).unwrap_or_else(|| "none".into());
    let potential = match pkind.as_str() {
        "none" => PotentialSpec::None,
        "constant" => PotentialSpec::Constant {
            scalar: pot.number("scalar")?.unwrap_or(0.0),
            vector: pot.number("vector")?.unwrap_or(0.0),
        },
        "harmonic" => {
            let frequency = pot.number("frequency")?;
            let frequency = pot.required("frequency", frequency)?;
            if params.charge == 0.0 {
                return Err(pot.error("kind", "a harmonic potential needs a nonzero charge"));
            }
            PotentialSpec::Harmonic {
                frequency,
                center: pot.number("center")?.unwrap_or(length / 2.0),
            }
        }
        "samples" => {
            let scalar = pot.custom("scalar-samples", |s| list(s, real_item))?.unwrap_or_else(|| vec![0.0; points]);
            let vector = pot.custom("vector-samples", |s| list(s, real_item))?.unwrap_or_else(|| vec![0.0; points]);
            for (key, v) in [("scalar-samples", &scalar), ("vector-samples", &vector)] {
                if v.len() != points {
                    return Err(pot.error(key, format!("expected {points} samples, got {}", v.len())));
                }
            }
            PotentialSpec::Samples { scalar, vector }
        }
        other => {
            return Err(pot.error(
                "kind",
                format!("unknown potential kind `{other}` (expected none, constant, harmonic or samples)"),
            ))
        }
    };
    pot.reject_unused(&format!("potential kind `{pkind}`"))?;
    if kind.is_free() && potential != PotentialSpec::None {
        return Err(pot.error("kind", format!("equation `{}` takes no potential", kind.label())));
    }

    // [trivialization]
    let tkind = triv.take("kind").map(|(v, _, _)| v.to_string()).unwrap_or_else(|| "identity".into());
    let trivialization = match tkind.as_str() {
        "identity" => TrivializationSpec::Identity,
        "constant-unitary" => TrivializationSpec::ConstantUnitary {
            angle: triv.number("angle")?.unwrap_or(0.0),
        },
        "phase-field" => TrivializationSpec::PhaseField {
            rate: triv.number("rate")?.unwrap_or(0.0),
            amplitude: triv.number("amplitude")?.unwrap_or(0.0),
            wavenumber: triv.number("wavenumber")?.unwrap_or(1.0),
        },
        other => {
            return Err(triv.error(
                "kind",
                format!("unknown trivialization `{other}` (expected identity, constant-unitary or phase-field)"),
            ))
        }
    };
    triv.reject_unused(&format!("trivialization `{tkind}`"))?;

    // [output]
    let every = out.parsed::<usize>("every", "a positive integer")?.unwrap_or(1);
    if every == 0 {
        return Err(out.error("every", "snapshot cadence must be positive"));
    }
    if time.steps() % every != 0 {
        return Err(out.error("every", format!("{} steps are not a multiple of the cadence {every}", time.steps())));
    }
    let observables = out.custom("observables", |s| list(s, |x| x.parse::<ObservableKind>()))?.unwrap_or_default();
    let directory = out.take("directory").map(|(v, _, _)| v.to_string()).unwrap_or_else(|| "out".into());
    let state = out.parsed::<bool>("state", "true or false")?.unwrap_or(true);
    let output = OutputSpec {
        every,
        observables,
        directory,
        state,
    };

    Ok(RunConfig {
        equation,
        grid,
        time,
        initial,
        potential,
        trivialization,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[equation]\nname = dirac-free\n\n[grid]\npoints = 64\nlength = 20\n\n[time]\nend = 1\nstep = 0.01\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.equation.kind, EquationKind::DiracFree);
        assert_eq!(c.equation.params, PhysicalParams::default());
        assert_eq!(c.grid.boundary, Boundary::Periodic);
        assert_eq!(c.time.start, 0.0);
        assert_eq!(c.time.scheme, Scheme::CrankNicolson);
        assert_eq!(c.time.steps(), 100);
        assert_eq!(c.potential, PotentialSpec::None);
        assert_eq!(c.trivialization, TrivializationSpec::Identity);
        assert_eq!(c.output.every, 1);
        assert!(matches!(c.initial, InitialSpec::Gaussian { center, .. } if center == 10.0));
        assert_eq!(c.components(), 4);
    }

    #[test]
    fn misspelled_key_is_named_with_its_line() {
        let text = MINIMAL.replace("length = 20", "length = 20\nboundry = periodic");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.message.contains("boundry"), "{e}");
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let text = format!("# header\n{}", MINIMAL.replace("points = 64", "  points=64   # spectral"));
        assert_eq!(parse_config(&text).unwrap(), parse_config(MINIMAL).unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_config("[equation\nname = dirac").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));
        let e = parse_config("name = dirac").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_config("[equation]\nName = dirac").unwrap_err();
        assert!(e.message.contains("malformed key"));
        let e = parse_config("[equation]\njust text").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
    }

    #[test]
    fn inconsistent_settings_rejected() {
        for (from, to) in [
            ("points = 64", "points = 48"),
            ("step = 0.01", "step = 0.03"),
            ("step = 0.01", "step = -0.01"),
            ("name = dirac-free", "name = dirac-free\nmass = -1"),
            ("name = dirac-free", "name = dirac-free\ncomponents = 2"),
        ] {
            assert!(parse_config(&MINIMAL.replace(from, to)).is_err(), "{to}");
        }
        let free_with_potential = format!("{MINIMAL}[potential]\nkind = constant\nscalar = 1\n");
        assert!(parse_config(&free_with_potential).is_err());
        let short = format!("{MINIMAL}[initial]\nkind = samples\nsamples = 1, 2:3\n");
        assert!(parse_config(&short).unwrap_err().message.contains("256"));
        let stray = format!("{MINIMAL}[initial]\nkind = plane-wave\nwidth = 2\n");
        assert!(parse_config(&stray).unwrap_err().message.contains("width"));
        assert!(parse_config("[grid]\npoints = 8\nlength = 1\n").unwrap_err().message.contains("[equation]"));
    }

    #[test]
    fn canonical_form_round_trips() {
        let text = "[equation]\nname = dirac\nmass = 0.5\n[grid]\npoints = 16\nlength = 6.283185307179586\n\
                    [time]\nend = 0.3\nstep = 0.1\nscheme = midpoint-exponential\n\
                    [initial]\nkind = plane-wave\nmode = -2\nspinor = negative\n\
                    [potential]\nkind = harmonic\nfrequency = 0.7\n\
                    [trivialization]\nkind = phase-field\nrate = 0.1\namplitude = 1e-3\n\
                    [output]\nevery = 3\nobservables = energy, position\ndirectory = runs/a\nstate = false\n";
        let a = parse_config(text).unwrap();
        let b = parse_config(&a.to_canonical()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_canonical(), b.to_canonical());
    }

    #[test]
    fn sample_lists_round_trip() {
        let n = 8;
        let samples: Vec<String> = (0..n).map(|j| format!("{}:{}", 0.1 * j as f64, -1.0 / (j as f64 + 3.0))).collect();
        let pot: Vec<String> = (0..n).map(|j| format!("{}", (j as f64).sin())).collect();
        let text = format!(
            "[equation]\nname = schrodinger\n[grid]\npoints = 8\nlength = 2\nboundary = reflecting\n[time]\nend = 0\nstep = 1\n\
             [initial]\nkind = samples\nsamples = {}\n[potential]\nkind = samples\nscalar-samples = {}\n",
            samples.join(", "),
            pot.join(",")
        );
        let a = parse_config(&text).unwrap();
        assert_eq!(parse_config(&a.to_canonical()).unwrap(), a);
    }
}
