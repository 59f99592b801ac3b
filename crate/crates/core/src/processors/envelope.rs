//! Linear ADSR envelope.

/// Segment times in seconds; `sustain` is a level in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdsrParams {
    pub attack_s: f64,
    pub decay_s: f64,
    pub sustain: f64,
    pub release_s: f64,
}

impl Default for AdsrParams {
    fn default() -> Self {
        Self {
            attack_s: 0.001,
            decay_s: 0.0,
            sustain: 1.0,
            release_s: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeStage {
    #[default]
    Idle,
    Attack,
    Decay,
    Sustain,
    Release,
}

/// Envelope state advanced one frame at a time.
///
/// Values depend only on the frames elapsed in the current segment, so a
/// segment of length `L` frames produces `k / L` at its k-th frame.
/// Zero-length segments are skipped within the same frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Envelope {
    stage: EnvelopeStage,
    elapsed: u64,
    release_from: f64,
    last: f64,
}

impl Envelope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&self) -> EnvelopeStage {
        self.stage
    }

    pub fn is_idle(&self) -> bool {
        self.stage == EnvelopeStage::Idle
    }

    /// Gate on; restarts the attack from zero.
    pub fn gate_on(&mut self) {
        self.stage = EnvelopeStage::Attack;
        self.elapsed = 0;
    }

    /// Gate off; releases from the most recent output value.
    pub fn gate_off(&mut self) {
        if self.stage != EnvelopeStage::Idle {
            self.stage = EnvelopeStage::Release;
            self.elapsed = 0;
            self.release_from = self.last;
        }
    }

    /// Value for the current frame, then advance one frame.
    pub fn next(&mut self, p: &AdsrParams, sample_rate: f64) -> f64 {
        let v = loop {
            let t = self.elapsed as f64;
            match self.stage {
                EnvelopeStage::Idle => break 0.0,
                EnvelopeStage::Attack => {
                    let len = p.attack_s * sample_rate;
                    if t >= len {
                        self.stage = EnvelopeStage::Decay;
                        self.elapsed = 0;
                        continue;
                    }
                    break t / len;
                }
                EnvelopeStage::Decay => {
                    let len = p.decay_s * sample_rate;
                    if t >= len {
                        self.stage = EnvelopeStage::Sustain;
                        self.elapsed = 0;
                        continue;
                    }
                    break 1.0 - (1.0 - p.sustain) * (t / len);
                }
                EnvelopeStage::Sustain => break p.sustain,
                EnvelopeStage::Release => {
                    let len = p.release_s * sample_rate;
                    if t >= len {
                        self.stage = EnvelopeStage::Idle;
                        self.elapsed = 0;
                        continue;
                    }
                    break self.release_from * (1.0 - t / len);
                }
            }
        };
        if self.stage != EnvelopeStage::Idle && self.stage != EnvelopeStage::Sustain {
            self.elapsed += 1;
        }
        let v = v.clamp(0.0, 1.0);
        self.last = v;
        v
    }
}
