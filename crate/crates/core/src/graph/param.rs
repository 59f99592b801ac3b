use serde::{Deserialize, Serialize};

/// Declared parameter of a processor kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    /// Settings that are read once per render (modes, voice counts) cannot
    /// carry a control signal.
    pub automatable: bool,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, default: f64, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            default,
            min,
            max,
            automatable: true,
        }
    }

    pub fn fixed(name: impl Into<String>, default: f64, min: f64, max: f64) -> Self {
        Self {
            automatable: false,
            ..Self::new(name, default, min, max)
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }

    #[inline]
    pub fn clamp(&self, value: f64) -> f64 {
        if value.is_nan() {
            self.default
        } else {
            value.clamp(self.min, self.max)
        }
    }
}

/// Audio-rate automation for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    values: Vec<f64>,
    hold_last: bool,
}

impl ControlSignal {
    /// `None` for an empty sequence.
    pub fn new(values: Vec<f64>, hold_last: bool) -> Option<Self> {
        if values.is_empty() {
            None
        } else {
            Some(Self { values, hold_last })
        }
    }

    pub fn constant(value: f64, frames: usize) -> Self {
        Self {
            values: vec![value; frames.max(1)],
            hold_last: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hold_last(&self) -> bool {
        self.hold_last
    }

    /// Effective value at engine frame `frame`; `scalar` applies once the
    /// signal is exhausted and `hold_last` is off.
    #[inline]
    pub fn value_at(&self, frame: usize, scalar: f64) -> f64 {
        match self.values.get(frame) {
            Some(v) => *v,
            None if self.hold_last => self.values[self.values.len() - 1],
            None => scalar,
        }
    }
}

/// Per-frame parameter values for the current block, one lane per schema
/// entry.
#[derive(Debug, Clone, Default)]
pub struct ParamLanes {
    lanes: Vec<Vec<f64>>,
    constant: Vec<bool>,
}

impl ParamLanes {
    pub(crate) fn new(count: usize, block_size: usize) -> Self {
        Self {
            lanes: vec![vec![0.0; block_size]; count],
            constant: vec![true; count],
        }
    }

    pub(crate) fn fill(
        &mut self,
        specs: &[ParamSpec],
        values: &[f64],
        automation: &[Option<ControlSignal>],
        start_frame: usize,
        len: usize,
    ) {
        for (i, lane) in self.lanes.iter_mut().enumerate() {
            let spec = &specs[i];
            match &automation[i] {
                Some(signal) => {
                    for (n, slot) in lane[..len].iter_mut().enumerate() {
                        *slot = spec.clamp(signal.value_at(start_frame + n, values[i]));
                    }
                    self.constant[i] = false;
                }
                None => {
                    lane[..len].fill(values[i]);
                    self.constant[i] = true;
                }
            }
        }
    }

    /// Values of parameter `index` for this block.
    #[inline]
    pub fn lane(&self, index: usize) -> &[f64] {
        &self.lanes[index]
    }

    #[inline]
    pub fn get(&self, index: usize, frame: usize) -> f64 {
        self.lanes[index][frame]
    }

    /// True when the parameter carries no automation, so every frame in the
    /// block holds the same value.
    pub fn is_constant(&self, index: usize) -> bool {
        self.constant[index]
    }

    pub fn len(&self) -> usize {
        self.lanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.is_empty()
    }

    /// Lanes holding the given values, for driving a processor directly.
    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        let constant = vec![false; values.len()];
        Self {
            lanes: values,
            constant,
        }
    }
}
