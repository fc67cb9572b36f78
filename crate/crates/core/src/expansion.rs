//! Expansion complexes realized as towers of subdivided seed tiles.
//!
//! A single-tile seed of type `t` at level `k` is a subtile of type `t` in
//! `R^k(t)`. Stage `m` of the tower is `R^{km}(t)`; stage `m - 1` sits
//! inside stage `m` as the descendants of the seed subtile, which is the
//! direct-limit inclusion. Inside stage `m` the seed tile `S` is the tile
//! reached by following the seed path `m` times, and `phi^j(S)` is the set
//! of tiles descending from the seed-chain tile of stage `m - j`.

use crate::complex::{tile_adjacency, AdjacencyMode, CellComplex, TileGraph, TypeId};
use crate::error::{Error, Result};
use crate::rules::{CompiledRule, SubdivisionRule};
use crate::subdivision::{genealogy, iterate, subdivide_compiled, Limits, SubdividedComplex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    pub ty: TypeId,
    pub level: usize,
    /// Subtile indices from `t` down to the seed subtile, one per level.
    pub path: Vec<u32>,
    /// Rotation taking the subtile's corners to the tile type's corners.
    /// Subtiles carry a typed first corner, so this is always 0.
    pub rotation: usize,
    /// Whether the seed subtile avoids the boundary of `R^level(t)`.
    pub interior: bool,
}

/// All single-tile seeds up to `max_level`. Levels whose subdivision would
/// exceed the tile budget are skipped.
pub fn find_seed(rule: &SubdivisionRule, max_level: usize, limits: &Limits) -> Result<Vec<Seed>> {
    let mut seeds = Vec::new();
    for i in 0..rule.types.len() {
        let ty = TypeId(i as u32);
        let chain = match iterate(rule, &rule.tile(ty), max_level, limits) {
            Ok(chain) => chain,
            Err(Error::BudgetExceeded { stage, .. }) => {
                iterate(rule, &rule.tile(ty), stage.saturating_sub(1), limits)?
            }
            Err(e) => return Err(e),
        };
        for level in 1..chain.len() {
            let c = &chain[level].complex;
            // a one-tile subdivision can never exhaust a plane
            if c.num_tiles() < 2 {
                continue;
            }
            let on_boundary = c.boundary_vertex_mask();
            for (t, tile) in c.tiles.iter().enumerate() {
                if tile.ty != ty {
                    continue;
                }
                let interior = !c.tile_vertices(t).any(|v| on_boundary[v as usize]);
                seeds.push(Seed {
                    ty,
                    level,
                    path: genealogy(&chain[..=level], t as u32),
                    rotation: 0,
                    interior,
                });
            }
        }
    }
    Ok(seeds)
}

/// First interior seed of lowest level, if any.
pub fn default_seed(
    rule: &SubdivisionRule,
    max_level: usize,
    limits: &Limits,
) -> Result<Option<Seed>> {
    let mut seeds = find_seed(rule, max_level, limits)?;
    seeds.sort_by_key(|s| (!s.interior, s.level, s.ty));
    Ok(seeds.into_iter().next())
}

/// Tiles at some stage used as the norm-zero set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedRegion {
    pub stage: usize,
    pub tiles: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub stage: usize,
    pub mode: AdjacencyMode,
    pub radius: u32,
    /// `(tile at `stage`, norm)`, sorted by tile.
    pub norms: Vec<(u32, u32)>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Tile counts per norm, `0..=radius`.
    pub fn sphere_counts(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.radius as usize + 1];
        for &(_, d) in &self.norms {
            s[d as usize] += 1;
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionTower {
    rule: SubdivisionRule,
    compiled: CompiledRule,
    seed: Seed,
    limits: Limits,
    generations: Vec<SubdividedComplex>,
    /// `inclusion[g]` maps generation `g - level` into generation `g`.
    inclusion: Vec<Vec<u32>>,
    seed_tiles: Vec<u32>,
    layers: Vec<Vec<u32>>,
    warnings: Vec<String>,
}

impl ExpansionTower {
    pub fn new(rule: &SubdivisionRule, seed: Seed, limits: Limits) -> Result<Self> {
        if seed.level == 0 || seed.path.len() != seed.level {
            return Err(Error::InvalidArgument(
                "seed path length must equal its level (>= 1)".into(),
            ));
        }
        if seed.ty.index() >= rule.types.len() {
            return Err(Error::UnknownTileType(format!("#{}", seed.ty.0)));
        }
        let compiled = CompiledRule::new(rule)?;
        let mut warnings = Vec::new();
        if !seed.interior {
            warnings.push(format!(
                "seed subtile of {} touches the boundary of its parent; stabilization is checked empirically",
                rule.type_name(seed.ty)
            ));
        }
        let root = SubdividedComplex::root(rule.tile(seed.ty));
        Ok(ExpansionTower {
            rule: rule.clone(),
            compiled,
            seed,
            limits,
            generations: vec![root],
            inclusion: vec![Vec::new()],
            seed_tiles: vec![0],
            layers: vec![vec![0]],
            warnings,
        })
    }

    pub fn rule(&self) -> &SubdivisionRule {
        &self.rule
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of stages built, counting stage 0.
    pub fn stages(&self) -> usize {
        self.seed_tiles.len()
    }

    pub fn stage(&self, m: usize) -> &CellComplex {
        &self.generations[m * self.seed.level].complex
    }

    pub fn generations(&self) -> &[SubdividedComplex] {
        &self.generations
    }

    /// The tile playing `S` at stage `m`.
    pub fn seed_tile(&self, m: usize) -> u32 {
        self.seed_tiles[m]
    }

    /// Layer index of each tile of stage `m`: 0 for `S`, `j` for tiles of
    /// `phi^j(S)` not in `phi^{j-1}(S)`.
    pub fn layers(&self, m: usize) -> &[u32] {
        &self.layers[m]
    }

    /// Adds one stage (`level` more subdivisions).
    pub fn extend(&mut self) -> Result<()> {
        let k = self.seed.level;
        for _ in 0..k {
            let g = self.generations.len();
            let next = subdivide_compiled(
                &self.rule,
                &self.compiled,
                &self.generations[g - 1].complex,
                &self.limits,
                g - 1,
            )
            .map_err(|e| match e {
                Error::BudgetExceeded { needed, limit, .. } => Error::BudgetExceeded {
                    needed,
                    limit,
                    stage: self.stages() - 1,
                },
                other => other,
            })?;
            self.generations.push(next);
            let map = if g < k {
                Vec::new()
            } else if g == k {
                let mut t = 0u32;
                for (j, &s) in self.seed.path.iter().enumerate() {
                    t = self.generations[j + 1].child(t, s);
                }
                vec![t]
            } else {
                let src = &self.generations[g - k];
                let prev = &self.inclusion[g - 1];
                (0..src.complex.num_tiles())
                    .map(|x| {
                        let y = src.parent[x];
                        self.generations[g].child(prev[y as usize], src.subtile[x])
                    })
                    .collect()
            };
            self.inclusion.push(map);
        }
        let m = self.stages();
        let g = m * k;
        let seed_tile = self.inclusion[g][self.seed_tiles[m - 1] as usize];
        let prev_layers = &self.layers[m - 1];
        let layers = (0..self.generations[g].complex.num_tiles() as u32)
            .map(|t| {
                if t == seed_tile {
                    0
                } else {
                    let mut a = t;
                    for j in 0..k {
                        a = self.generations[g - j].parent[a as usize];
                    }
                    prev_layers[a as usize] + 1
                }
            })
            .collect();
        self.seed_tiles.push(seed_tile);
        self.layers.push(layers);
        Ok(())
    }

    pub fn ensure_stages(&mut self, stages: usize) -> Result<()> {
        while self.stages() < stages {
            self.extend()?;
        }
        Ok(())
    }

    /// Image of a stage-`from` tile in stage `to` (`from <= to`).
    pub fn include(&self, tile: u32, from: usize, to: usize) -> u32 {
        let k = self.seed.level;
        (from..to).fold(tile, |t, m| self.inclusion[(m + 1) * k][t as usize])
    }

    /// Checks that every stage sits inside the next as exactly the
    /// `phi^{m-1}(S)` region, with types and fat adjacency preserved.
    pub fn verify_inclusions(&self) -> Result<()> {
        let fail = |m: usize, what: &str| {
            Err(Error::InvalidArgument(format!(
                "stage {m} inclusion: {what}"
            )))
        };
        for m in 1..self.stages() {
            let small = self.stage(m - 1);
            let big = self.stage(m);
            let map: Vec<u32> = (0..small.num_tiles() as u32)
                .map(|t| self.include(t, m - 1, m))
                .collect();
            let mut hit = vec![false; big.num_tiles()];
            for (t, &u) in map.iter().enumerate() {
                if std::mem::replace(&mut hit[u as usize], true) {
                    return fail(m, "not injective");
                }
                if small.tiles[t].ty != big.tiles[u as usize].ty {
                    return fail(m, "tile type changed");
                }
            }
            for (u, &h) in hit.iter().enumerate() {
                if h != (self.layers[m][u] < m as u32) {
                    return fail(m, "image differs from the marked region");
                }
            }
            let gs = tile_adjacency(small, AdjacencyMode::Fat);
            let gb = tile_adjacency(big, AdjacencyMode::Fat);
            let mut pairs = 0usize;
            for (t, nb) in gs.neighbors.iter().enumerate() {
                for &u in nb {
                    if !gb.adjacent(map[t], map[u as usize]) {
                        return fail(m, "adjacency lost");
                    }
                    pairs += 1;
                }
            }
            let image_pairs: usize = (0..big.num_tiles())
                .filter(|&u| hit[u])
                .map(|u| gb.neighbors[u].iter().filter(|&&w| hit[w as usize]).count())
                .sum();
            if image_pairs != pairs {
                return fail(m, "adjacency added");
            }
        }
        Ok(())
    }

    fn region_at(&self, region: &SeedRegion, m: usize) -> Vec<u32> {
        region
            .tiles
            .iter()
            .map(|&t| self.include(t, region.stage, m))
            .collect()
    }

    /// Smallest skinny norm among tiles of stage `m` that touch its boundary.
    pub fn boundary_distance(&self, m: usize, region: &SeedRegion) -> u32 {
        let c = self.stage(m);
        let g = tile_adjacency(c, AdjacencyMode::Skinny);
        boundary_distance(c, &g.bfs(&self.region_at(region, m)))
    }

    /// The ball computed inside stage `m`, or `None` when stage `m` is too
    /// small to certify it.
    pub fn ball_at_stage(
        &self,
        m: usize,
        region: &SeedRegion,
        r: u32,
        mode: AdjacencyMode,
    ) -> Option<Ball> {
        if m < region.stage {
            return None;
        }
        let c = self.stage(m);
        let sources = self.region_at(region, m);
        let skinny = tile_adjacency(c, AdjacencyMode::Skinny);
        let sk = skinny.bfs(&sources);
        if boundary_distance(c, &sk) <= r {
            return None;
        }
        let dist = match mode {
            AdjacencyMode::Skinny => sk,
            AdjacencyMode::Fat => tile_adjacency(c, AdjacencyMode::Fat).bfs(&sources),
        };
        let norms = dist
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d <= r)
            .map(|(t, &d)| (t as u32, d))
            .collect();
        Some(Ball {
            stage: m,
            mode,
            radius: r,
            norms,
        })
    }

    /// Exact ball of radius `r` about the seed tile in the limit complex,
    /// extending the tower until it is certified.
    pub fn ball(&mut self, r: u32, mode: AdjacencyMode) -> Result<Ball> {
        let region = SeedRegion {
            stage: 0,
            tiles: vec![0],
        };
        self.ball_from(&region, r, mode)
    }

    pub fn ball_from(&mut self, region: &SeedRegion, r: u32, mode: AdjacencyMode) -> Result<Ball> {
        if region.tiles.is_empty() {
            return Err(Error::InvalidArgument("empty seed region".into()));
        }
        self.ensure_stages(region.stage + 1)?;
        if region
            .tiles
            .iter()
            .any(|&t| t as usize >= self.stage(region.stage).num_tiles())
        {
            return Err(Error::InvalidArgument(
                "seed region tile out of range".into(),
            ));
        }
        let mut m = region.stage;
        loop {
            if let Some(ball) = self.ball_at_stage(m, region, r, mode) {
                return Ok(ball);
            }
            m += 1;
            self.ensure_stages(m + 1)?;
        }
    }

    /// The annulus `phi^n(S) \ int(S)` read off stage `n`.
    pub fn annulus(&self, n: usize) -> Result<Annulus> {
        if n == 0 {
            return Err(Error::InvalidArgument("annulus index must be >= 1".into()));
        }
        if self.stages() <= n {
            return Err(Error::InsufficientStages {
                have: self.stages(),
                need: n + 1,
            });
        }
        let c = self.stage(n);
        let seed = self.seed_tile(n);
        let seed_vertices: Vec<u32> = c.tile_vertices(seed as usize).collect();
        let on_boundary = c.boundary_vertex_mask();
        let mut local = vec![u32::MAX; c.num_tiles()];
        let mut tiles = Vec::with_capacity(c.num_tiles().saturating_sub(1));
        for t in 0..c.num_tiles() as u32 {
            if t != seed {
                local[t as usize] = tiles.len() as u32;
                tiles.push(t);
            }
        }
        let layer: Vec<u32> = tiles.iter().map(|&t| self.layers[n][t as usize]).collect();
        let inner = tiles
            .iter()
            .map(|&t| {
                c.tile_vertices(t as usize)
                    .any(|v| seed_vertices.contains(&v))
            })
            .collect();
        let outer = tiles
            .iter()
            .map(|&t| c.tile_vertices(t as usize).any(|v| on_boundary[v as usize]))
            .collect();
        let fat = tile_adjacency(c, AdjacencyMode::Fat);
        let neighbors = tiles
            .iter()
            .map(|&t| {
                fat.neighbors[t as usize]
                    .iter()
                    .filter(|&&u| u != seed)
                    .map(|&u| local[u as usize])
                    .collect()
            })
            .collect();
        Ok(Annulus {
            n,
            tiles,
            layer,
            inner,
            outer,
            graph: TileGraph { neighbors },
        })
    }
}

fn boundary_distance(c: &CellComplex, skinny_dist: &[u32]) -> u32 {
    let on_boundary = c.boundary_vertex_mask();
    (0..c.num_tiles())
        .filter(|&t| c.tile_vertices(t).any(|v| on_boundary[v as usize]))
        .map(|t| skinny_dist[t])
        .min()
        .unwrap_or(u32::MAX)
}

pub fn build_tower(
    rule: &SubdivisionRule,
    seed: Seed,
    stages: usize,
    limits: Limits,
) -> Result<ExpansionTower> {
    let mut tower = ExpansionTower::new(rule, seed, limits)?;
    tower.ensure_stages(stages + 1)?;
    tower.verify_inclusions()?;
    Ok(tower)
}

/// `R_n = phi^n(S) \ int(S)` with its layer decomposition. Tiles are
/// indexed locally; `tiles[i]` is the stage-`n` tile id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annulus {
    pub n: usize,
    pub tiles: Vec<u32>,
    /// Layer `k` in `1..=n` of each tile.
    pub layer: Vec<u32>,
    /// Tiles meeting the seed tile.
    pub inner: Vec<bool>,
    /// Tiles meeting the outer boundary.
    pub outer: Vec<bool>,
    /// Fat adjacency between annulus tiles.
    pub graph: TileGraph,
}

impl Annulus {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// `counts[k - 1]` = number of tiles in layer `k`.
    pub fn layer_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for &k in &self.layer {
            counts[k as usize - 1] += 1;
        }
        counts
    }
}
