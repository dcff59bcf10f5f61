//! Mutation-only (μ+λ) evolution with non-dominated survivor selection.
//!
//! Every generation draws one fresh environment parameter set and
//! re-evaluates parents and offspring alike on it, so nobody keeps a
//! score earned under easier conditions. Seeds for every evaluation are
//! derived from (master seed, generation, pool slot), which makes the
//! run independent of evaluation order and therefore of the worker
//! count.

use rayon::prelude::*;

use crate::archive::{GenerationRecord, IndividualRecord, RunArchive};
use crate::episode::{fitness, run_episode, FitnessVector, H_CEILING, H_LANDED};
use crate::error::{Error, Result};
use crate::genome::{mutate, random_genome, Arch, Genome};
use crate::network::NeuroController;
use crate::nsga::truncate;
use crate::rng::{self, TAG_EVAL, TAG_INIT, TAG_OFFSPRING, TAG_PARAMS};
use crate::sim_params::{sample_params, SimParams};

/// A live population member.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub id: u64,
    pub genome: Genome,
    pub fitness: FitnessVector,
}

/// Run setup. The master seed is supplied separately so one config can
/// drive many repeats.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvoConfig {
    pub arch: Arch,
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub altitudes_m: Vec<f64>,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
}

impl EvoConfig {
    pub fn defaults(arch: Arch) -> Self {
        EvoConfig {
            arch,
            mu: 100,
            lambda: 100,
            generations: 250,
            altitudes_m: vec![2.0, 4.0, 6.0, 8.0],
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
        }
    }

    /// Small preset that finishes in minutes on a desktop.
    pub fn desk(arch: Arch) -> Self {
        EvoConfig {
            mu: 50,
            lambda: 50,
            generations: 50,
            ..EvoConfig::defaults(arch)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu == 0 || self.lambda == 0 {
            return Err(Error::InvalidConfig(
                "population and offspring counts must be at least 1".into(),
            ));
        }
        if self.altitudes_m.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one evaluation altitude is required".into(),
            ));
        }
        for &h in &self.altitudes_m {
            if !h.is_finite() || h <= H_LANDED || h >= H_CEILING {
                return Err(Error::AltitudeOutOfRange(h));
            }
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig(format!(
                "mutation rate {} outside [0, 1]",
                self.mutation_rate
            )));
        }
        if !self.mutation_sigma.is_finite() || self.mutation_sigma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "mutation sigma {} must be finite and non-negative",
                self.mutation_sigma
            )));
        }
        Ok(())
    }
}

/// Mean fitness of one genome over one episode per altitude. Each run
/// gets its own derived seed; the parameter draw is shared.
pub fn evaluate(
    genome: &Genome,
    params: &SimParams,
    altitudes_m: &[f64],
    seed: u64,
) -> Result<FitnessVector> {
    if altitudes_m.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one evaluation altitude is required".into(),
        ));
    }
    let mut controller = NeuroController::new(genome.clone());
    let mut sum = [0.0f64; 3];
    for (run, &h0) in altitudes_m.iter().enumerate() {
        let traj = run_episode(
            &mut controller,
            h0,
            params,
            rng::derive_seed(seed, &[run as u64]),
        )?;
        let f = fitness(&traj).as_array();
        for k in 0..3 {
            sum[k] += f[k];
        }
    }
    let n = altitudes_m.len() as f64;
    Ok(FitnessVector::from_array([
        sum[0] / n,
        sum[1] / n,
        sum[2] / n,
    ]))
}

fn evaluate_pool(
    pool: &[(u64, Genome)],
    config: &EvoConfig,
    params: &SimParams,
    master_seed: u64,
    gen: usize,
) -> Result<Vec<FitnessVector>> {
    pool.par_iter()
        .enumerate()
        .map(|(slot, (_, genome))| {
            evaluate(
                genome,
                params,
                &config.altitudes_m,
                rng::derive_seed(master_seed, &[TAG_EVAL, gen as u64, slot as u64]),
            )
        })
        .collect()
}

fn select(
    pool: Vec<(u64, Genome)>,
    pool_fitness: &[FitnessVector],
    capacity: usize,
) -> Result<(Vec<Individual>, Vec<IndividualRecord>)> {
    let survivors = truncate(pool_fitness, capacity)?;
    let mut population = Vec::with_capacity(survivors.len());
    let mut records = Vec::with_capacity(survivors.len());
    let mut pool: Vec<Option<(u64, Genome)>> = pool.into_iter().map(Some).collect();
    for s in &survivors {
        let (id, genome) = pool[s.slot].take().expect("slots are unique");
        records.push(IndividualRecord {
            genome_id: id,
            fitness: pool_fitness[s.slot],
            rank: s.rank,
            crowding: s.crowding,
        });
        population.push(Individual {
            id,
            genome,
            fitness: pool_fitness[s.slot],
        });
    }
    Ok((population, records))
}

/// One generation: shared parameter draw, parent re-evaluation, λ
/// mutated offspring, joint truncation back to μ. Returns the new
/// population (in selection order) and its archive record.
pub fn generation_step(
    parents: &[Individual],
    config: &EvoConfig,
    master_seed: u64,
    gen: usize,
) -> Result<(Vec<Individual>, GenerationRecord)> {
    if parents.len() != config.mu {
        return Err(Error::DimensionMismatch(parents.len(), config.mu));
    }
    if gen == 0 {
        return Err(Error::InvalidConfig(
            "generation 0 is the evaluated initial population".into(),
        ));
    }
    let params = sample_params(&mut rng::stream(master_seed, &[TAG_PARAMS, gen as u64]));

    let mut pool: Vec<(u64, Genome)> = parents
        .iter()
        .map(|p| (p.id, p.genome.clone()))
        .collect();
    let mut offspring_rng = rng::stream(master_seed, &[TAG_OFFSPRING, gen as u64]);
    for k in 0..config.lambda {
        let parent = rand::Rng::gen_range(&mut offspring_rng, 0..config.mu);
        let child = mutate(
            &parents[parent].genome,
            config.mutation_rate,
            config.mutation_sigma,
            &mut offspring_rng,
        );
        let id = (config.mu + (gen - 1) * config.lambda + k) as u64;
        pool.push((id, child));
    }

    let pool_fitness = evaluate_pool(&pool, config, &params, master_seed, gen)?;
    let (population, individuals) = select(pool, &pool_fitness, config.mu)?;
    Ok((
        population,
        GenerationRecord {
            gen,
            params,
            individuals,
        },
    ))
}

/// An evolution run in progress. Stepping it yields one archived
/// generation at a time; construction already evaluates generation 0.
pub struct Evolution {
    config: EvoConfig,
    master_seed: u64,
    population: Vec<Individual>,
    archive: RunArchive,
}

impl Evolution {
    pub fn new(config: EvoConfig, master_seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init_rng = rng::stream(master_seed, &[TAG_INIT]);
        let pool: Vec<(u64, Genome)> = (0..config.mu)
            .map(|i| (i as u64, random_genome(config.arch, &mut init_rng)))
            .collect();
        let params = sample_params(&mut rng::stream(master_seed, &[TAG_PARAMS, 0]));
        let pool_fitness = evaluate_pool(&pool, &config, &params, master_seed, 0)?;
        let (population, individuals) = select(pool, &pool_fitness, config.mu)?;

        let mut archive = RunArchive::default();
        for p in &population {
            archive.genomes.insert(p.id, p.genome.clone());
        }
        archive.records.push(GenerationRecord {
            gen: 0,
            params,
            individuals,
        });
        Ok(Evolution {
            config,
            master_seed,
            population,
            archive,
        })
    }

    /// Index of the last completed generation.
    pub fn generation(&self) -> usize {
        self.archive.records.len() - 1
    }

    pub fn done(&self) -> bool {
        self.generation() >= self.config.generations
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn step(&mut self) -> Result<&GenerationRecord> {
        let gen = self.generation() + 1;
        let (population, record) =
            generation_step(&self.population, &self.config, self.master_seed, gen)?;
        self.population = population;
        for p in &self.population {
            self.archive.genomes.entry(p.id).or_insert_with(|| p.genome.clone());
        }
        self.archive.records.push(record);
        Ok(self.archive.records.last().expect("just pushed"))
    }

    pub fn into_archive(self) -> RunArchive {
        self.archive
    }
}

/// Run a whole configured evolution and return its archive. The archive
/// holds generations+1 snapshots: the evaluated initial population plus
/// one per generation step.
pub fn evolve(config: EvoConfig, master_seed: u64) -> Result<RunArchive> {
    let mut evo = Evolution::new(config, master_seed)?;
    while !evo.done() {
        evo.step()?;
    }
    Ok(evo.into_archive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsga::{crowding_distance, dominates, non_dominated_sort};

    fn tiny_config(arch: Arch) -> EvoConfig {
        EvoConfig {
            arch,
            mu: 4,
            lambda: 4,
            generations: 2,
            altitudes_m: vec![4.0],
            mutation_rate: 0.2,
            mutation_sigma: 0.1,
        }
    }

    #[test]
    fn zero_output_genome_scores_the_hover_fitness() {
        let g = Genome::zero(Arch::Nn);
        let f = evaluate(
            &g,
            &SimParams::nominal(),
            &[2.0, 4.0, 6.0, 8.0],
            7,
        )
        .unwrap();
        assert_eq!(f.f1, 30.0);
        assert_eq!(f.f2, 5.0);
        assert_eq!(f.f3, 0.0);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let mut r = rng::stream(31, &[]);
        let g = random_genome(Arch::Rnn, &mut r);
        let params = SimParams::nominal();
        let a = evaluate(&g, &params, &[2.0, 4.0], 99).unwrap();
        let b = evaluate(&g, &params, &[2.0, 4.0], 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_altitude_evaluation_equals_that_run() {
        let mut r = rng::stream(32, &[]);
        let g = random_genome(Arch::Ctrnn, &mut r);
        let params = SimParams::nominal();
        let f = evaluate(&g, &params, &[4.0], 5).unwrap();
        let mut c = NeuroController::new(g);
        let traj = run_episode(&mut c, 4.0, &params, rng::derive_seed(5, &[0])).unwrap();
        assert_eq!(f, fitness(&traj));
    }

    #[test]
    fn empty_altitude_list_is_rejected() {
        let g = Genome::zero(Arch::Nn);
        assert!(evaluate(&g, &SimParams::nominal(), &[], 1).is_err());
    }

    #[test]
    fn no_offspring_means_membership_is_unchanged() {
        let mut config = tiny_config(Arch::Nn);
        let evo = Evolution::new(config.clone(), 17).unwrap();
        let parents = evo.population().to_vec();
        config.lambda = 0;
        let (next, _) = generation_step(&parents, &config, 17, 1).unwrap();
        let mut before: Vec<u64> = parents.iter().map(|p| p.id).collect();
        let mut after: Vec<u64> = next.iter().map(|p| p.id).collect();
        before.sort_unstable();
        after.sort_unstable();
        assert_eq!(before, after);
    }

    #[test]
    fn replay_reproduces_the_whole_archive() {
        let config = tiny_config(Arch::Rnn);
        let a = evolve(config.clone(), 23).unwrap();
        let b = evolve(config, 23).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_change_the_archive() {
        let config = tiny_config(Arch::Ctrnn);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| evolve(config.clone(), 41))
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| evolve(config, 41))
            .unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn archive_has_one_snapshot_per_generation_plus_the_start() {
        let mut config = tiny_config(Arch::Nn);
        config.generations = 0;
        let archive = evolve(config.clone(), 3).unwrap();
        assert_eq!(archive.records.len(), 1);
        assert_eq!(archive.records[0].gen, 0);

        config.generations = 3;
        let archive = evolve(config, 3).unwrap();
        assert_eq!(archive.records.len(), 4);
        let gens: Vec<usize> = archive.records.iter().map(|r| r.gen).collect();
        assert_eq!(gens, vec![0, 1, 2, 3]);
    }

    #[test]
    fn snapshots_reference_archived_genomes_with_stable_ids() {
        let config = tiny_config(Arch::Nn);
        let archive = evolve(config.clone(), 11).unwrap();
        let highest_possible = (config.mu + config.generations * config.lambda) as u64;
        for record in &archive.records {
            assert_eq!(record.individuals.len(), config.mu);
            for ind in &record.individuals {
                assert!(ind.genome_id < highest_possible);
                assert!(archive.genomes.contains_key(&ind.genome_id));
                archive.genomes[&ind.genome_id].validate().unwrap();
            }
        }
        // Initial ids are 0..mu; each generation's newcomers sit in its
        // own id block.
        let init_ids: Vec<u64> = archive.records[0]
            .individuals
            .iter()
            .map(|i| i.genome_id)
            .collect();
        assert!(init_ids.iter().all(|&id| id < config.mu as u64));
        for record in &archive.records[1..] {
            let block_end = (config.mu + record.gen * config.lambda) as u64;
            for ind in &record.individuals {
                assert!(ind.genome_id < block_end);
            }
        }
    }

    #[test]
    fn survivors_match_an_independent_truncation_of_the_pool() {
        // Rebuild the generation-1 pool (same streams), score it, and
        // select with the plain quadratic oracle: strip fronts in rank
        // order, thin the straddler by crowding. Survivor ids must
        // agree with what generation_step archived.
        let config = tiny_config(Arch::Ctrnn);
        let master = 59;
        let evo = Evolution::new(config.clone(), master).unwrap();
        let parents = evo.population().to_vec();
        let (next, record) = generation_step(&parents, &config, master, 1).unwrap();

        let mut pool: Vec<(u64, Genome)> =
            parents.iter().map(|p| (p.id, p.genome.clone())).collect();
        let mut off_rng = rng::stream(master, &[TAG_OFFSPRING, 1]);
        for k in 0..config.lambda {
            let p = rand::Rng::gen_range(&mut off_rng, 0..config.mu);
            let child = mutate(
                &parents[p].genome,
                config.mutation_rate,
                config.mutation_sigma,
                &mut off_rng,
            );
            pool.push(((config.mu + k) as u64, child));
        }
        let params = sample_params(&mut rng::stream(master, &[TAG_PARAMS, 1]));
        assert_eq!(params, record.params);
        let scores: Vec<FitnessVector> = pool
            .iter()
            .enumerate()
            .map(|(slot, (_, g))| {
                evaluate(
                    g,
                    &params,
                    &config.altitudes_m,
                    rng::derive_seed(master, &[TAG_EVAL, 1, slot as u64]),
                )
                .unwrap()
            })
            .collect();

        let fronts = non_dominated_sort(&scores).unwrap();
        let mut keep: Vec<usize> = Vec::new();
        for front in &fronts {
            if keep.len() + front.len() <= config.mu {
                keep.extend_from_slice(front);
            } else {
                let d = crowding_distance(&scores, front);
                let mut order: Vec<usize> = (0..front.len()).collect();
                order.sort_by(|&a, &b| {
                    d[b].partial_cmp(&d[a]).unwrap().then(front[a].cmp(&front[b]))
                });
                keep.extend(order[..config.mu - keep.len()].iter().map(|&w| front[w]));
                break;
            }
        }
        let mut expect: Vec<u64> = keep.iter().map(|&s| pool[s].0).collect();
        let mut got: Vec<u64> = next.iter().map(|p| p.id).collect();
        expect.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expect);

        // Elitism: nothing discarded dominates any survivor.
        let kept: Vec<bool> = {
            let mut k = vec![false; pool.len()];
            for &s in &keep {
                k[s] = true;
            }
            k
        };
        for loser in 0..pool.len() {
            if kept[loser] {
                continue;
            }
            for &winner in &keep {
                assert!(!dominates(&scores[loser], &scores[winner]));
            }
        }
    }

    #[test]
    fn final_front_is_closed_under_non_dominated_sort() {
        let config = tiny_config(Arch::Rnn);
        let archive = evolve(config, 77).unwrap();
        let front = archive.final_front().unwrap();
        assert!(!front.is_empty());
        let scores: Vec<FitnessVector> = front.iter().map(|i| i.fitness).collect();
        let fronts = non_dominated_sort(&scores).unwrap();
        assert_eq!(fronts.len(), 1, "front members must be mutually non-dominated");
        for (a, sa) in scores.iter().enumerate() {
            for (b, sb) in scores.iter().enumerate() {
                if a != b {
                    assert!(!dominates(sa, sb));
                }
            }
        }
    }

    #[test]
    fn config_validation_rejects_bad_setups() {
        let mut c = EvoConfig::defaults(Arch::Nn);
        c.mu = 0;
        assert!(c.validate().is_err());
        let mut c = EvoConfig::defaults(Arch::Nn);
        c.altitudes_m = vec![20.0];
        assert!(c.validate().is_err());
        let mut c = EvoConfig::defaults(Arch::Nn);
        c.altitudes_m.clear();
        assert!(c.validate().is_err());
        let mut c = EvoConfig::defaults(Arch::Nn);
        c.mutation_rate = 1.5;
        assert!(c.validate().is_err());
        assert!(EvoConfig::desk(Arch::Ctrnn).validate().is_ok());
    }
}
