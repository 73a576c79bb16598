//! Slow-convergence detection from a moving average of the objective.
//!
//! `M_j` is the mean of the latest `window_n` objectives, `Conv_j` the
//! relative change between consecutive means and `I_j = |Conv_{j+1} − Conv_j|`.
//! The monitor fires once `I_j < eps_conv` holds for two consecutive `j`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EPS_CONV_STRICT: f64 = 1e-4;
/// Looser profile; hands off earlier.
pub const EPS_CONV_LOOSE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMonitor {
    pub window_n: usize,
    pub eps_conv: f64,
    history: VecDeque<f64>,
    last_mean: Option<f64>,
    last_conv: Option<f64>,
    consecutive_hits: usize,
    observed: usize,
}

/// One observation's indices; `None` until enough history exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorStep {
    pub mean: Option<f64>,
    pub conv: Option<f64>,
    pub index: Option<f64>,
    pub fired: bool,
}

impl ConvergenceMonitor {
    pub fn new(window_n: usize, eps_conv: f64) -> Result<Self> {
        if window_n == 0 {
            return Err(Error::InvalidConfig("monitor window must be at least 1".into()));
        }
        if !(eps_conv > 0.0) {
            return Err(Error::InvalidConfig(format!("eps_conv must be positive, got {eps_conv}")));
        }
        Ok(ConvergenceMonitor {
            window_n,
            eps_conv,
            history: VecDeque::with_capacity(window_n),
            last_mean: None,
            last_conv: None,
            consecutive_hits: 0,
            observed: 0,
        })
    }

    pub fn observed(&self) -> usize {
        self.observed
    }

    pub fn consecutive_hits(&self) -> usize {
        self.consecutive_hits
    }

    pub fn has_fired(&self) -> bool {
        self.consecutive_hits >= 2
    }
}

impl Default for ConvergenceMonitor {
    fn default() -> Self {
        ConvergenceMonitor::new(5, EPS_CONV_STRICT).expect("default monitor settings are valid")
    }
}

/// Feeds objective `f_k` to the monitor.
pub fn convergence_index(monitor: &mut ConvergenceMonitor, f_k: f64) -> Result<MonitorStep> {
    monitor.observed += 1;
    if monitor.history.len() == monitor.window_n {
        monitor.history.pop_front();
    }
    monitor.history.push_back(f_k);
    let mut step = MonitorStep { mean: None, conv: None, index: None, fired: monitor.has_fired() };
    if monitor.history.len() < monitor.window_n {
        return Ok(step);
    }
    let mean = monitor.history.iter().sum::<f64>() / monitor.window_n as f64;
    step.mean = Some(mean);
    if let Some(prev_mean) = monitor.last_mean.replace(mean) {
        if prev_mean == 0.0 {
            return Err(Error::Domain("moving-average objective is zero".into()));
        }
        let conv = (mean - prev_mean).abs() / prev_mean.abs();
        step.conv = Some(conv);
        if let Some(prev_conv) = monitor.last_conv.replace(conv) {
            let index = (conv - prev_conv).abs();
            step.index = Some(index);
            if index < monitor.eps_conv {
                monitor.consecutive_hits += 1;
            } else {
                monitor.consecutive_hits = 0;
            }
        }
    }
    step.fired = monitor.has_fired();
    Ok(step)
}
