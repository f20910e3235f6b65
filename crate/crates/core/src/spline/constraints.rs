//! Interpolation constraints and the coefficient directions that keep them.
//!
//! Constraining node `i` in one channel fixes the stencil
//! `c_{i-1}/6 + 2c_i/3 + c_{i+1}/6 = f_i`. With at least one free node
//! between constrained nodes, every constrained row owns its centre
//! coefficient `c_i` exclusively, so eliminating those pivots leaves one
//! null-space direction per remaining coefficient: the unit vector of that
//! coefficient plus `-1/4` on the pivot of each constrained row touching it.
//! Next to an isolated constraint these are the `(1, -1/4, 0)` and
//! `(0, -1/4, 1)` directions; a coefficient shared by two constrained rows
//! gets `-1/4` on both pivots.

use super::{Channel, ChannelMask, SplineCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub node: usize,
    /// Target `(x, y, r)`; entries outside `mask` are ignored.
    pub target: [f64; 3],
    pub mask: ChannelMask,
}

/// Interpolation conditions, kept sorted by node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    entries: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates node range and spacing against a curve with `node_count`
    /// nodes.
    pub fn new(mut entries: Vec<Constraint>, node_count: usize) -> Result<Self> {
        entries.retain(|c| !c.mask.is_empty());
        entries.sort_by_key(|c| c.node);
        let n = node_count.saturating_sub(1);
        for c in &entries {
            if c.node > n {
                return Err(Error::ConstraintOutOfRange { node: c.node, n });
            }
        }
        for pair in entries.windows(2) {
            if pair[1].node < pair[0].node + 2 {
                return Err(Error::ConstraintSpacing {
                    first: pair[0].node,
                    second: pair[1].node,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Constraint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|c| c.node)
    }

    fn nodes_in(&self, channel: Channel) -> impl Iterator<Item = &Constraint> + '_ {
        self.entries
            .iter()
            .filter(move |c| c.mask.contains(channel))
    }

    /// Number of scalar conditions summed over channels.
    pub fn scalar_count(&self) -> usize {
        Channel::ALL
            .iter()
            .map(|&ch| self.nodes_in(ch).count())
            .sum()
    }

    /// Largest `|γ(t_i) - f_i|` over all constrained node/channel pairs.
    pub fn max_residual(&self, curve: &SplineCurve) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.entries {
            let Some(v) = curve.node_value(c.node) else {
                return f64::INFINITY;
            };
            for ch in Channel::ALL {
                if c.mask.contains(ch) {
                    worst = worst.max((v[ch.index()] - c.target[ch.index()]).abs());
                }
            }
        }
        worst
    }

    /// Re-solves the centre coefficient of every constrained row in
    /// `channel` so the stencil hits its target again.
    pub(crate) fn restore_channel(&self, curve: &mut SplineCurve, channel: Channel) {
        let ch = channel.index();
        let pts = curve.control_points_mut();
        for c in self.nodes_in(channel) {
            let left = pts[c.node][ch];
            let right = pts[c.node + 2][ch];
            pts[c.node + 1][ch] = 1.5 * (c.target[ch] - (left + right) / 6.0);
        }
    }
}

/// Vector with explicit support, indices ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    /// `target += scale * self`.
    pub fn axpy(&self, scale: f64, target: &mut [f64]) {
        for &(i, v) in &self.entries {
            target[i] += scale * v;
        }
    }
}

/// Per-channel unit directions over the `n + 3` coefficient slots.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpace {
    coefficient_count: usize,
    channels: [Vec<SparseVector>; 3],
}

impl NullSpace {
    pub fn coefficient_count(&self) -> usize {
        self.coefficient_count
    }

    pub fn channel(&self, channel: Channel) -> &[SparseVector] {
        &self.channels[channel.index()]
    }

    pub fn dimension(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    /// Directions over the flattened `3(n + 3)` variables, channel-major:
    /// all x directions, then y, then r.
    pub fn flattened(&self) -> Vec<SparseVector> {
        Channel::ALL
            .iter()
            .flat_map(|&ch| {
                self.channels[ch.index()].iter().map(move |v| SparseVector {
                    entries: v
                        .entries
                        .iter()
                        .map(|&(s, w)| (3 * s + ch.index(), w))
                        .collect(),
                })
            })
            .collect()
    }
}

/// Unit basis of the coefficient perturbations that leave every constrained
/// node value unchanged, per channel.
pub fn constraint_nullspace(constraints: &ConstraintSet, node_count: usize) -> Result<NullSpace> {
    if node_count < 2 {
        return Err(Error::TooFewNodes(node_count));
    }
    // Re-validate: a set built for a longer curve may not fit this one.
    let constraints = ConstraintSet::new(constraints.entries.clone(), node_count)?;
    let m = node_count + 2;
    let build = |channel: Channel| {
        // pivot[s] = true when slot s is the centre of a constrained row
        let mut pivot = vec![false; m];
        for c in constraints.nodes_in(channel) {
            pivot[c.node + 1] = true;
        }
        (0..m)
            .filter(|&s| !pivot[s])
            .map(|s| {
                let mut entries = Vec::with_capacity(3);
                if s > 0 && pivot[s - 1] {
                    entries.push((s - 1, -0.25));
                }
                entries.push((s, 1.0));
                if s + 1 < m && pivot[s + 1] {
                    entries.push((s + 1, -0.25));
                }
                let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                for e in &mut entries {
                    e.1 /= norm;
                }
                SparseVector { entries }
            })
            .collect::<Vec<_>>()
    };
    Ok(NullSpace {
        coefficient_count: m,
        channels: [build(Channel::X), build(Channel::Y), build(Channel::R)],
    })
}
