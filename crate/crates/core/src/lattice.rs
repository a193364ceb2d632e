//! Diluted square lattice with periodic boundaries.
//!
//! Sites hold at most one player. Players are referred to by an [`AgentId`]
//! that does not change when they move, so everything attached to a player
//! (Q-table, payoff, strategy) travels with it.

use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng;

use crate::ParamError;

/// A site on the torus, always stored in canonical form (`0 <= row, col < L`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex {
    pub row: usize,
    pub col: usize,
}

impl SiteIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        SiteIndex { row, col }
    }

    /// Reduces arbitrary integer coordinates modulo `side`.
    pub fn wrapped(row: i64, col: i64, side: usize) -> Self {
        let l = side as i64;
        SiteIndex {
            row: row.rem_euclid(l) as usize,
            col: col.rem_euclid(l) as usize,
        }
    }

    fn linear(self, side: usize) -> usize {
        self.row * side + self.col
    }

    fn from_linear(index: usize, side: usize) -> Self {
        SiteIndex {
            row: index / side,
            col: index % side,
        }
    }
}

/// Stable handle of a player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Von Neumann neighbours of `site` in (N, S, W, E) order.
#[inline]
pub fn neighbors(site: SiteIndex, side: usize) -> [SiteIndex; 4] {
    debug_assert!(site.row < side && site.col < side);
    let up = if site.row == 0 {
        side - 1
    } else {
        site.row - 1
    };
    let down = if site.row + 1 == side {
        0
    } else {
        site.row + 1
    };
    let left = if site.col == 0 {
        side - 1
    } else {
        site.col - 1
    };
    let right = if site.col + 1 == side {
        0
    } else {
        site.col + 1
    };
    [
        SiteIndex::new(up, site.col),
        SiteIndex::new(down, site.col),
        SiteIndex::new(site.row, left),
        SiteIndex::new(site.row, right),
    ]
}

/// Number of players placed on a lattice of side `side` at density `rho`:
/// `rho * side^2` rounded half up.
pub fn dilution_count(side: usize, rho: f64) -> usize {
    let sites = (side * side) as f64;
    let count = libm::floor(rho * sites + 0.5) as usize;
    count.min(side * side)
}

/// Up to four sites, in neighbour order.
#[derive(Clone, Copy, Debug)]
pub struct SiteList {
    sites: [SiteIndex; 4],
    len: u8,
}

impl SiteList {
    fn new() -> Self {
        SiteList {
            sites: [SiteIndex::new(0, 0); 4],
            len: 0,
        }
    }

    fn push(&mut self, site: SiteIndex) {
        self.sites[self.len as usize] = site;
        self.len += 1;
    }
}

impl Deref for SiteList {
    type Target = [SiteIndex];

    fn deref(&self) -> &[SiteIndex] {
        &self.sites[..self.len as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    side: usize,
    cells: Vec<Option<AgentId>>,
    player_count: usize,
}

impl Lattice {
    /// A lattice with no players.
    pub fn empty(side: usize) -> Result<Self, ParamError> {
        if side < 2 {
            return Err(ParamError::Side(side));
        }
        Ok(Lattice {
            side,
            cells: alloc::vec![None; side * side],
            player_count: 0,
        })
    }

    /// Occupies `round(rho * side^2)` distinct sites drawn uniformly without
    /// replacement. Handles are assigned in row-major order of the chosen
    /// sites, starting at 0.
    pub fn build<R: Rng + ?Sized>(side: usize, rho: f64, rng: &mut R) -> Result<Self, ParamError> {
        // `!(x > 0)` also rejects NaN.
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(ParamError::Density(rho));
        }
        let mut lattice = Lattice::empty(side)?;
        let total = side * side;
        let count = dilution_count(side, rho);
        let mut chosen = rand::seq::index::sample(rng, total, count).into_vec();
        chosen.sort_unstable();
        for (id, linear) in chosen.into_iter().enumerate() {
            lattice.place(SiteIndex::from_linear(linear, side), AgentId(id as u32));
        }
        Ok(lattice)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn player_count(&self) -> usize {
        self.player_count
    }

    #[inline]
    pub fn occupant(&self, site: SiteIndex) -> Option<AgentId> {
        self.cells[site.linear(self.side)]
    }

    #[inline]
    pub fn is_occupied(&self, site: SiteIndex) -> bool {
        self.occupant(site).is_some()
    }

    /// Puts `agent` on the empty site `site`.
    ///
    /// Panics if the site is outside the lattice or already occupied.
    pub fn place(&mut self, site: SiteIndex, agent: AgentId) {
        assert!(
            site.row < self.side && site.col < self.side,
            "site {site:?} outside lattice of side {}",
            self.side
        );
        let cell = &mut self.cells[site.linear(self.side)];
        assert!(cell.is_none(), "site {site:?} is already occupied");
        *cell = Some(agent);
        self.player_count += 1;
    }

    #[inline]
    pub fn neighbors(&self, site: SiteIndex) -> [SiteIndex; 4] {
        neighbors(site, self.side)
    }

    /// Empty neighbours of `site`, in (N, S, W, E) order.
    #[inline]
    pub fn vacant_neighbors(&self, site: SiteIndex) -> SiteList {
        let mut out = SiteList::new();
        for n in self.neighbors(site) {
            if !self.is_occupied(n) {
                out.push(n);
            }
        }
        out
    }

    /// Moves the player at `from` to the adjacent empty site `to`.
    ///
    /// Panics if `from` is empty, `to` is occupied, or the two sites are not
    /// neighbours.
    pub fn relocate(&mut self, from: SiteIndex, to: SiteIndex) {
        assert!(
            self.neighbors(from).contains(&to),
            "relocation target {to:?} is not a neighbour of {from:?}"
        );
        let side = self.side;
        let agent = self.cells[from.linear(side)]
            .take()
            .unwrap_or_else(|| panic!("relocation source {from:?} is empty"));
        let target = &mut self.cells[to.linear(side)];
        assert!(target.is_none(), "relocation target {to:?} is occupied");
        *target = Some(agent);
    }

    /// Occupied sites with their occupants, in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (SiteIndex, AgentId)> + '_ {
        let side = self.side;
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, c)| c.map(|a| (SiteIndex::from_linear(i, side), a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn count_occupied(l: &Lattice) -> usize {
        let side = l.side();
        let mut n = 0;
        for r in 0..side {
            for c in 0..side {
                if l.is_occupied(SiteIndex::new(r, c)) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn build_counts() {
        let l = Lattice::build(100, 0.6, &mut rng(1)).unwrap();
        assert_eq!(l.player_count(), 6000);
        assert_eq!(count_occupied(&l), 6000);

        let l = Lattice::build(100, 1.0, &mut rng(2)).unwrap();
        assert_eq!(count_occupied(&l), 10_000);

        let l = Lattice::build(10, 0.357, &mut rng(3)).unwrap();
        assert_eq!(count_occupied(&l), 36);
    }

    #[test]
    fn rounding_is_half_up() {
        // 0.125 * 4^2 = 2.0 exactly, 0.15625 * 16 = 2.5 -> 3
        assert_eq!(dilution_count(4, 0.125), 2);
        assert_eq!(dilution_count(4, 0.15625), 3);
        assert_eq!(dilution_count(4, 0.09375), 2); // 1.5 -> 2
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            Lattice::build(1, 0.5, &mut rng(0)),
            Err(ParamError::Side(1))
        );
        assert_eq!(
            Lattice::build(10, 0.0, &mut rng(0)),
            Err(ParamError::Density(0.0))
        );
        assert_eq!(
            Lattice::build(10, 1.2, &mut rng(0)),
            Err(ParamError::Density(1.2))
        );
        assert!(Lattice::build(10, f64::NAN, &mut rng(0)).is_err());
    }

    #[test]
    fn handles_are_dense_and_unique() {
        let l = Lattice::build(12, 0.5, &mut rng(9)).unwrap();
        let mut ids: Vec<u32> = l.occupied().map(|(_, a)| a.0).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..72).collect::<Vec<_>>());
    }

    #[test]
    fn neighbor_examples() {
        let s = SiteIndex::new;
        assert_eq!(neighbors(s(0, 0), 5), [s(4, 0), s(1, 0), s(0, 4), s(0, 1)]);
        assert_eq!(neighbors(s(2, 2), 5), [s(1, 2), s(3, 2), s(2, 1), s(2, 3)]);
        assert_eq!(neighbors(s(4, 4), 5), [s(3, 4), s(0, 4), s(4, 3), s(4, 0)]);
    }

    #[test]
    fn vacant_neighbor_examples() {
        let full = Lattice::build(6, 1.0, &mut rng(4)).unwrap();
        assert!(full.vacant_neighbors(SiteIndex::new(3, 3)).is_empty());

        let mut lone = Lattice::empty(5).unwrap();
        let centre = SiteIndex::new(2, 2);
        lone.place(centre, AgentId(0));
        assert_eq!(&*lone.vacant_neighbors(centre), &neighbors(centre, 5)[..]);

        let mut crowded = Lattice::empty(5).unwrap();
        crowded.place(centre, AgentId(0));
        for (i, n) in neighbors(centre, 5).into_iter().take(3).enumerate() {
            crowded.place(n, AgentId(i as u32 + 1));
        }
        assert_eq!(&*crowded.vacant_neighbors(centre), &[SiteIndex::new(2, 3)]);
    }

    #[test]
    fn relocate_moves_handle() {
        let mut l = Lattice::empty(4).unwrap();
        l.place(SiteIndex::new(0, 0), AgentId(7));
        let before = l.clone();
        l.relocate(SiteIndex::new(0, 0), SiteIndex::new(0, 1));
        assert_eq!(l.occupant(SiteIndex::new(0, 0)), None);
        assert_eq!(l.occupant(SiteIndex::new(0, 1)), Some(AgentId(7)));
        assert_eq!(l.player_count(), 1);
        l.relocate(SiteIndex::new(0, 1), SiteIndex::new(0, 0));
        assert_eq!(l, before);
    }

    #[test]
    #[should_panic(expected = "is occupied")]
    fn relocate_onto_occupied_panics() {
        let mut l = Lattice::empty(4).unwrap();
        l.place(SiteIndex::new(0, 0), AgentId(0));
        l.place(SiteIndex::new(0, 1), AgentId(1));
        l.relocate(SiteIndex::new(0, 0), SiteIndex::new(0, 1));
    }

    #[test]
    #[should_panic(expected = "is empty")]
    fn relocate_from_empty_panics() {
        let mut l = Lattice::empty(4).unwrap();
        l.relocate(SiteIndex::new(0, 0), SiteIndex::new(0, 1));
    }

    #[test]
    #[should_panic(expected = "not a neighbour")]
    fn relocate_far_panics() {
        let mut l = Lattice::empty(4).unwrap();
        l.place(SiteIndex::new(0, 0), AgentId(0));
        l.relocate(SiteIndex::new(0, 0), SiteIndex::new(2, 2));
    }

    #[test]
    fn occupancy_exact_for_random_pairs() {
        let mut r = rng(2024);
        for _ in 0..1000 {
            let side = r.random_range(2..=40usize);
            let rho = 1.0 - r.random::<f64>(); // (0, 1]
            let l = Lattice::build(side, rho, &mut r).unwrap();
            let expected = libm::round(rho * (side * side) as f64) as usize;
            assert_eq!(count_occupied(&l), expected, "side={side} rho={rho}");
            assert_eq!(l.player_count(), expected);
        }
    }

    proptest! {
        #[test]
        fn neighborhood_is_symmetric(side in 2usize..12, r in 0usize..12, c in 0usize..12) {
            let a = SiteIndex::new(r % side, c % side);
            for b in neighbors(a, side) {
                prop_assert!(neighbors(b, side).contains(&a));
            }
        }

        #[test]
        fn wrapped_is_canonical(side in 2usize..50, r in -200i64..200, c in -200i64..200) {
            let s = SiteIndex::wrapped(r, c, side);
            prop_assert!(s.row < side && s.col < side);
            prop_assert_eq!(s, SiteIndex::wrapped(r + side as i64, c - 3 * side as i64, side));
        }

        #[test]
        fn random_walks_conserve_players(seed in any::<u64>(), rho in 0.05f64..0.95) {
            let mut r = rng(seed);
            let mut l = Lattice::build(8, rho, &mut r).unwrap();
            let n = l.player_count();
            for _ in 0..200 {
                let sites: Vec<SiteIndex> = l.occupied().map(|(s, _)| s).collect();
                let from = sites[r.random_range(0..sites.len())];
                let free = l.vacant_neighbors(from);
                if !free.is_empty() {
                    let to = free[r.random_range(0..free.len())];
                    l.relocate(from, to);
                }
                prop_assert_eq!(l.player_count(), n);
                prop_assert_eq!(count_occupied(&l), n);
            }
        }
    }
}
