use std::fmt;

use super::ModelError;

/// Seconds since midnight of the delivery day, or a non-negative duration.
pub type Seconds = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderId(pub u32);

impl fmt::Display for WindowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Display for OrderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A delivery slot `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub id: WindowId,
    pub start: Seconds,
    pub end: Seconds,
}

impl TimeWindow {
    pub fn length(&self) -> Seconds {
        self.end - self.start
    }

    pub fn overlaps(&self, other: &TimeWindow) -> bool {
        other.start < self.end && self.start < other.end
    }

    /// `other` lies within `self` (`s_self <= s_other <= e_other <= e_self`).
    pub fn encloses(&self, other: &TimeWindow) -> bool {
        self.start <= other.start && other.start <= other.end && other.end <= self.end
    }
}

/// The offered delivery slots. Window ids are their positions in the set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WindowSet {
    windows: Vec<TimeWindow>,
    overlapping: bool,
}

impl WindowSet {
    pub fn new<I>(spans: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Seconds, Seconds)>,
    {
        let mut windows: Vec<TimeWindow> = Vec::new();
        for (idx, (start, end)) in spans.into_iter().enumerate() {
            if start >= end {
                return Err(ModelError::InvalidWindow { start, end });
            }
            if windows.iter().any(|w| w.start == start && w.end == end) {
                return Err(ModelError::DuplicateWindow { start, end });
            }
            windows.push(TimeWindow {
                id: WindowId(idx as u32),
                start,
                end,
            });
        }
        let overlapping = windows
            .iter()
            .enumerate()
            .any(|(u, a)| windows[u + 1..].iter().any(|b| a.overlaps(b)));
        Ok(WindowSet {
            windows,
            overlapping,
        })
    }

    pub fn get(&self, id: WindowId) -> Option<&TimeWindow> {
        self.windows.get(id.0 as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TimeWindow> + '_ {
        self.windows.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = WindowId> + '_ {
        self.windows.iter().map(|w| w.id)
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// True iff some pair of windows overlaps.
    pub fn is_overlapping(&self) -> bool {
        self.overlapping
    }
}

/// Integer grid coordinates in meters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Location {
    pub x: i64,
    pub y: i64,
}

impl Location {
    pub const fn new(x: i64, y: i64) -> Self {
        Location { x, y }
    }

    pub fn distance(&self, other: &Location) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        dx.hypot(dy)
    }
}

/// A customer order. `window` is the assigned slot for scheduled orders; for a
/// prospective order it only records the preferred slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Order {
    pub id: OrderId,
    pub location: Location,
    pub weight: u32,
    pub service: Seconds,
    pub window: WindowId,
}

impl Order {
    pub fn validate(&self, windows: &WindowSet) -> Result<(), ModelError> {
        if self.weight == 0 || self.service <= 0 {
            return Err(ModelError::InvalidOrder(self.id));
        }
        if windows.get(self.window).is_none() {
            return Err(ModelError::UnknownWindow(self.window));
        }
        Ok(())
    }

    /// A copy of this order bound to `window`.
    pub fn in_window(&self, window: WindowId) -> Order {
        Order { window, ..*self }
    }
}
