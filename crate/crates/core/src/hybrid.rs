//! Genomes of either encoding, CPPN → direct conversion, and reproduction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{segment_outputs, AssemblyError};
use crate::cppn::{CppnGenome, CppnMutationRates, CppnMutationReport};
use crate::direct::{DirectGenome, Layout, PolynomialMutation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "genome", rename_all = "lowercase")]
pub enum Genotype {
    Cppn(CppnGenome),
    Direct(DirectGenome),
}

impl Genotype {
    pub fn is_cppn(&self) -> bool {
        matches!(self, Genotype::Cppn(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Genotype::Cppn(_) => "cppn",
            Genotype::Direct(_) => "direct",
        }
    }
}

/// How a genome came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Initial,
    Mutated,
    Crossed,
    Converted,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Initial => "initial",
            Provenance::Mutated => "mutated",
            Provenance::Crossed => "crossed",
            Provenance::Converted => "converted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    #[serde(flatten)]
    pub genotype: Genotype,
    pub provenance: Provenance,
}

impl Genome {
    pub fn initial(genotype: Genotype) -> Self {
        Self {
            genotype,
            provenance: Provenance::Initial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingMode {
    #[serde(rename = "cppn2gan")]
    Cppn2Gan,
    #[serde(rename = "direct2gan")]
    Direct2Gan,
    #[serde(rename = "cppn-then-direct2gan")]
    CppnThenDirect2Gan,
}

impl EncodingMode {
    pub const ALL: [EncodingMode; 3] = [EncodingMode::Cppn2Gan, EncodingMode::Direct2Gan, EncodingMode::CppnThenDirect2Gan];

    pub fn name(self) -> &'static str {
        match self {
            EncodingMode::Cppn2Gan => "cppn2gan",
            EncodingMode::Direct2Gan => "direct2gan",
            EncodingMode::CppnThenDirect2Gan => "cppn-then-direct2gan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Random initial genome: CPPNs except in the direct mode.
    pub fn random_genome<R: Rng + ?Sized>(self, layout: &Layout, rng: &mut R) -> Genome {
        let genotype = match self {
            EncodingMode::Direct2Gan => Genotype::Direct(DirectGenome::random(*layout, rng)),
            _ => Genotype::Cppn(CppnGenome::random(layout.cppn_inputs(), layout.segment_width(), rng)),
        };
        Genome::initial(genotype)
    }

    /// Default reproduction settings; only the hybrid mode converts.
    pub fn default_params(self) -> ReproductionParams {
        ReproductionParams {
            conversion: if self == EncodingMode::CppnThenDirect2Gan { 0.3 } else { 0.0 },
            ..ReproductionParams::default()
        }
    }
}

impl std::fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproductionParams {
    pub conversion: f64,
    pub crossover: f64,
    pub cppn: CppnMutationRates,
    pub direct: PolynomialMutation,
}

impl Default for ReproductionParams {
    fn default() -> Self {
        Self {
            conversion: 0.0,
            crossover: 0.5,
            cppn: CppnMutationRates::default(),
            direct: PolynomialMutation::default(),
        }
    }
}

/// What happened while producing one child.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReproductionReport {
    pub converted: bool,
    pub crossed: bool,
    /// A mate was drawn but had the other encoding.
    pub crossover_cancelled: bool,
    pub cppn: Option<CppnMutationReport>,
    pub direct_genes_mutated: Option<usize>,
}

/// The direct genome holding `g`'s outputs at every segment coordinate.
pub fn convert(g: &CppnGenome, layout: &Layout) -> Result<DirectGenome, AssemblyError> {
    let outputs = segment_outputs(&Genotype::Cppn(g.clone()), layout)?;
    Ok(DirectGenome::new(*layout, outputs.concat())?)
}

/// Produce one child from `parent`.
///
/// Order of events: conversion coin (CPPN parents only), then crossover coin;
/// `mate` is only called when crossover fires. Mates of the other encoding
/// cancel the crossover. The child is always mutated.
pub fn reproduce<'a, R, F>(
    parent: &Genome,
    mate: F,
    layout: &Layout,
    params: &ReproductionParams,
    rng: &mut R,
) -> Result<(Genome, ReproductionReport), AssemblyError>
where
    R: Rng + ?Sized,
    F: FnOnce(&mut R) -> Option<&'a Genome>,
{
    let mut report = ReproductionReport::default();
    if let Genotype::Cppn(g) = &parent.genotype {
        if rng.random::<f64>() < params.conversion {
            let direct = convert(g, layout)?;
            let (child, touched) = direct.mutate(&params.direct, rng);
            report.converted = true;
            report.direct_genes_mutated = Some(touched);
            return Ok((
                Genome {
                    genotype: Genotype::Direct(child),
                    provenance: Provenance::Converted,
                },
                report,
            ));
        }
    }

    let mut base = parent.genotype.clone();
    if rng.random::<f64>() < params.crossover {
        if let Some(other) = mate(rng) {
            match (&parent.genotype, &other.genotype) {
                (Genotype::Cppn(a), Genotype::Cppn(b)) => {
                    base = Genotype::Cppn(a.crossover(b, rng)?);
                    report.crossed = true;
                }
                (Genotype::Direct(a), Genotype::Direct(b)) => {
                    base = Genotype::Direct(a.crossover(b, rng)?);
                    report.crossed = true;
                }
                _ => report.crossover_cancelled = true,
            }
        }
    }

    let genotype = match base {
        Genotype::Cppn(g) => {
            let (child, r) = g.mutate(&params.cppn, rng);
            report.cppn = Some(r);
            Genotype::Cppn(child)
        }
        Genotype::Direct(d) => {
            let (child, touched) = d.mutate(&params.direct, rng);
            report.direct_genes_mutated = Some(touched);
            Genotype::Direct(child)
        }
    };
    let provenance = if report.crossed { Provenance::Crossed } else { Provenance::Mutated };
    Ok((Genome { genotype, provenance }, report))
}
