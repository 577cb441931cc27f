use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::uniform_index;
use crate::eval::{Descriptor, LevelStats};
use crate::hybrid::Genome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub genome: Genome,
    pub fitness: f64,
    pub bin: Vec<usize>,
    pub stats: LevelStats,
    /// Iteration that produced it; 0 for the initial population.
    pub birth: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub evaluations: u64,
    pub replacements: u64,
    pub failures: u64,
    pub conversions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    NewBin,
    Replaced,
    Rejected,
}

/// At most one elite per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub descriptor: Descriptor,
    cells: BTreeMap<Vec<usize>, Elite>,
    /// Occupied bins in the order they were first filled; sampling indexes
    /// into this so it does not depend on map iteration.
    order: Vec<Vec<usize>>,
    pub counters: Counters,
}

impl Archive {
    pub fn new(descriptor: Descriptor) -> Self {
        Self {
            descriptor,
            cells: BTreeMap::new(),
            order: Vec::new(),
            counters: Counters::default(),
        }
    }

    pub(crate) fn from_parts(descriptor: Descriptor, elites: Vec<Elite>, order: Vec<Vec<usize>>, counters: Counters) -> Option<Self> {
        let cells: BTreeMap<_, _> = elites.into_iter().map(|e| (e.bin.clone(), e)).collect();
        let consistent = order.len() == cells.len() && order.iter().all(|b| cells.contains_key(b));
        consistent.then_some(Self {
            descriptor,
            cells,
            order,
            counters,
        })
    }

    /// Place `elite` if its bin is empty or it is strictly fitter than the
    /// incumbent.
    pub fn insert(&mut self, elite: Elite) -> Insertion {
        assert!(
            self.descriptor.contains(&elite.bin),
            "bin {:?} outside {:?}",
            elite.bin,
            self.descriptor.cardinalities
        );
        match self.cells.get_mut(&elite.bin) {
            None => {
                self.order.push(elite.bin.clone());
                self.cells.insert(elite.bin.clone(), elite);
                Insertion::NewBin
            }
            Some(old) if elite.fitness > old.fitness => {
                *old = elite;
                self.counters.replacements += 1;
                Insertion::Replaced
            }
            Some(_) => Insertion::Rejected,
        }
    }

    pub fn get(&self, bin: &[usize]) -> Option<&Elite> {
        self.cells.get(bin)
    }

    /// Uniformly chosen occupied bin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Elite> {
        if self.order.is_empty() {
            return None;
        }
        let bin = &self.order[uniform_index(rng, self.order.len())];
        self.cells.get(bin)
    }

    pub fn filled(&self) -> usize {
        self.cells.len()
    }

    pub fn qd_score(&self) -> f64 {
        self.cells.values().map(|e| e.fitness).sum()
    }

    /// Elites in bin order.
    pub fn elites(&self) -> impl Iterator<Item = &Elite> {
        self.cells.values()
    }

    pub fn fill_order(&self) -> &[Vec<usize>] {
        &self.order
    }

    pub fn cppn_elites(&self) -> usize {
        self.cells.values().filter(|e| e.genome.genotype.is_cppn()).count()
    }

    pub fn best(&self) -> Option<&Elite> {
        self.cells
            .values()
            .fold(None, |best: Option<&Elite>, e| match best {
                Some(b) if b.fitness >= e.fitness => Some(b),
                _ => Some(e),
            })
    }
}
