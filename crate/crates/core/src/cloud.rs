//! Semantic laser points with their sensor positions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point3, Ray};

/// Number of semantic classes carried per point.
pub const LABEL_COUNT: usize = 8;

/// Façade classes in their fixed column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticLabel {
    Arch = 0,
    Column = 1,
    Molding = 2,
    Floor = 3,
    Door = 4,
    Window = 5,
    Wall = 6,
    Other = 7,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; LABEL_COUNT] = [
        SemanticLabel::Arch,
        SemanticLabel::Column,
        SemanticLabel::Molding,
        SemanticLabel::Floor,
        SemanticLabel::Door,
        SemanticLabel::Window,
        SemanticLabel::Wall,
        SemanticLabel::Other,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticLabel::Arch => "arch",
            SemanticLabel::Column => "column",
            SemanticLabel::Molding => "molding",
            SemanticLabel::Floor => "floor",
            SemanticLabel::Door => "door",
            SemanticLabel::Window => "window",
            SemanticLabel::Wall => "wall",
            SemanticLabel::Other => "other",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type LabelProbs = [f64; LABEL_COUNT];

/// Point mass on one label.
pub fn one_hot(label: SemanticLabel) -> LabelProbs {
    let mut p = [0.0; LABEL_COUNT];
    p[label.id()] = 1.0;
    p
}

/// `confidence` on `label`, the remainder spread evenly over the others.
pub fn peaked(label: SemanticLabel, confidence: f64) -> LabelProbs {
    let rest = (1.0 - confidence) / (LABEL_COUNT - 1) as f64;
    let mut p = [rest; LABEL_COUNT];
    p[label.id()] = confidence;
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub position: Point3,
    pub sensor: Point3,
    pub true_label: Option<SemanticLabel>,
    pub prob: LabelProbs,
}

impl PointRecord {
    /// Highest-probability class; ties resolve to the lower id.
    pub fn predicted(&self) -> SemanticLabel {
        argmax(&self.prob)
    }

    pub fn ray(&self) -> crate::Result<Ray> {
        Ray::between(self.sensor, self.position)
    }

    pub fn relabel(&mut self, label: SemanticLabel) {
        self.prob = one_hot(label);
    }
}

pub fn argmax(prob: &LabelProbs) -> SemanticLabel {
    let mut best = 0;
    for i in 1..LABEL_COUNT {
        if prob[i] > prob[best] {
            best = i;
        }
    }
    SemanticLabel::ALL[best]
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<PointRecord>,
}

impl PointCloud {
    pub fn new(points: Vec<PointRecord>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PointRecord> {
        self.points.iter()
    }
}

impl FromIterator<PointRecord> for PointCloud {
    fn from_iter<I: IntoIterator<Item = PointRecord>>(iter: I) -> Self {
        PointCloud::new(iter.into_iter().collect())
    }
}
