use crate::error::{Error, Result};

/// One engine: `mau_count` multiply-accumulate units of `mau_width` lanes
/// each, an adder tree of depth `log2(mau_count)` and a scale/function
/// (SF) stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NpeConfig {
    pub mau_count: usize,
    pub mau_width: usize,
    /// Entries of 32 bits.
    pub register_file_size: usize,
    pub clock_hz: f64,
    pub memory_latency: usize,
}

impl Default for NpeConfig {
    fn default() -> Self {
        Self {
            mau_count: 64,
            mau_width: 16,
            register_file_size: 65536,
            clock_hz: 260e6,
            memory_latency: 2,
        }
    }
}

impl NpeConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.mau_count.is_power_of_two() || self.mau_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "mau_count must be a power of two >= 2, got {}",
                self.mau_count
            )));
        }
        if self.mau_width == 0 || self.mau_count * self.mau_width > u16::MAX as usize {
            return Err(Error::InvalidArgument("mau_width must be >= 1 and c * width < 65536".into()));
        }
        if self.register_file_size == 0 {
            return Err(Error::InvalidArgument("register file is empty".into()));
        }
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad clock {}", self.clock_hz)));
        }
        if self.memory_latency > 255 {
            return Err(Error::InvalidArgument("memory latency above 255 cycles".into()));
        }
        Ok(())
    }

    pub fn tree_depth(&self) -> u32 {
        self.mau_count.trailing_zeros()
    }

    /// Multiplies per MA issue.
    pub fn issue_width(&self) -> usize {
        self.mau_count * self.mau_width
    }

    /// Tap depth and output lanes for dot products of length `k`, or `None`
    /// when `k` needs several chunks at full depth.
    pub fn tap_for(&self, k: usize) -> Option<(u32, usize)> {
        if k > self.issue_width() {
            return None;
        }
        let per_mau = k.div_ceil(self.mau_width).max(1);
        let d = per_mau.next_power_of_two().trailing_zeros().max(1);
        Some((d, self.mau_count >> d))
    }

    /// `key = value` lines naming the fields of this struct; `#` starts a
    /// comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected key=value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = || Error::InvalidArgument(format!("bad value {v:?} for {k}"));
            match k {
                "mau_count" | "c" => self.mau_count = v.parse().map_err(|_| bad())?,
                "mau_width" => self.mau_width = v.parse().map_err(|_| bad())?,
                "register_file_size" => self.register_file_size = v.parse().map_err(|_| bad())?,
                "clock_hz" => self.clock_hz = v.parse().map_err(|_| bad())?,
                "memory_latency" => self.memory_latency = v.parse().map_err(|_| bad())?,
                _ => {
                    return Err(Error::Unknown {
                        kind: "engine setting",
                        name: k.to_string(),
                    })
                }
            }
        }
        self.validate()
    }

    pub fn seconds(&self, cycles: u64) -> f64 {
        cycles as f64 / self.clock_hz
    }
}
