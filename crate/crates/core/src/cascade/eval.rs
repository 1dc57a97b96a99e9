use super::{Cascade, CascadeError, Stage};
use crate::haar::ScaledFeature;
use crate::imaging::{IntegralPair, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowOutcome {
    /// All stages passed; `score` is the final stage sum minus its threshold.
    Accept { score: f64 },
    /// Rejected at this zero-based stage index.
    Reject { stage: usize },
}

impl WindowOutcome {
    pub fn is_accept(&self) -> bool {
        matches!(self, WindowOutcome::Accept { .. })
    }
}

/// A cascade with every feature resolved for one window size.
#[derive(Debug, Clone)]
pub struct ScaledCascade<'c> {
    stages: &'c [Stage],
    features: Vec<ScaledFeature>,
    window_w: u32,
    window_h: u32,
}

impl<'c> ScaledCascade<'c> {
    pub fn new(cascade: &'c Cascade, window_w: u32, window_h: u32) -> Result<Self, CascadeError> {
        let window = Rect::new(0, 0, window_w, window_h);
        let scale = window_w as f64 / cascade.base_w() as f64;
        if window_w < 1 || (window_h as f64 - cascade.base_h() as f64 * scale).abs() > 1.0 {
            return Err(CascadeError::Window {
                window,
                message: format!(
                    "aspect differs from the {}x{} base window",
                    cascade.base_w(),
                    cascade.base_h()
                ),
            });
        }
        let features = cascade
            .features()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.scaled(scale, window_w, window_h)
                    .map_err(|source| CascadeError::Feature { feature: i, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            stages: cascade.stages(),
            features,
            window_w,
            window_h,
        })
    }

    pub fn window_size(&self) -> (u32, u32) {
        (self.window_w, self.window_h)
    }

    /// Evaluates the window at origin `(x, y)`, stopping at the first failing stage.
    /// The window must lie inside the image.
    pub fn evaluate(&self, ip: &IntegralPair, x: u32, y: u32) -> WindowOutcome {
        let window = Rect::new(x, y, self.window_w, self.window_h);
        let norm = normalizer(ip, window);
        let mut margin = 0.0;
        for (s, stage) in self.stages.iter().enumerate() {
            let sum: f64 = stage
                .weak
                .iter()
                .map(|w| {
                    let value = self.features[w.feature].raw_at(ip, x, y) / norm;
                    if value < w.threshold {
                        w.left
                    } else {
                        w.right
                    }
                })
                .sum();
            if sum < stage.threshold {
                return WindowOutcome::Reject { stage: s };
            }
            margin = sum - stage.threshold;
        }
        WindowOutcome::Accept { score: margin }
    }
}

/// `σ · area` for the window, with σ taken as 1 for a uniform window.
#[inline]
pub(crate) fn normalizer(ip: &IntegralPair, window: Rect) -> f64 {
    let area = window.area() as u128;
    let sum = ip.sum_unchecked(window) as u128;
    let sq = ip.sq_sum_unchecked(window) as u128;
    // area² · variance, exact in integers.
    let scaled_var = (area * sq).saturating_sub(sum * sum);
    if scaled_var == 0 {
        area as f64
    } else {
        (scaled_var as f64).sqrt()
    }
}

impl Cascade {
    /// Staged evaluation of one window with early rejection.
    pub fn eval_window(&self, ip: &IntegralPair, window: Rect) -> Result<WindowOutcome, CascadeError> {
        if !window.fits(ip.width(), ip.height()) {
            return Err(CascadeError::Window {
                window,
                message: format!("outside the {}x{} image", ip.width(), ip.height()),
            });
        }
        let scaled = ScaledCascade::new(self, window.w, window.h)?;
        Ok(scaled.evaluate(ip, window.x, window.y))
    }
}
