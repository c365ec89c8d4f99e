//! Social rating network data model: users, items, observed ratings and
//! directed social ties.
//!
//! A [`RatingsTable`] stores the sparse observed part of the user-rating
//! matrix. Membership of `(user, item)` in the table is the observation mask;
//! anything absent is unspecified. A [`SocialGraph`] stores directed ties and
//! answers neighborhood queries. [`SocialRatingNetwork`] pairs the two over a
//! shared user index space and keeps the external labels read from input
//! files.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense user index in `[0, n_users)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserId(pub usize);

/// Dense item index in `[0, n_items)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemId(pub usize);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u#{}", self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i#{}", self.0)
    }
}

/// Bijection between external string labels and dense indices, assigned in
/// first-appearance order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Labels `{prefix}0 .. {prefix}{n-1}`.
    pub fn sequential(prefix: &str, n: usize) -> Self {
        let mut labels = Self::new();
        for i in 0..n {
            labels.intern(&format!("{prefix}{i}"));
        }
        labels
    }

    /// Returns the index for `label`, assigning the next free one on first sight.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.names.len();
        self.names.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Extends with sequential labels until `len() == n`; labels that would
    /// collide get a numeric suffix.
    fn pad_to(&mut self, prefix: &str, n: usize) {
        while self.names.len() < n {
            let mut candidate = format!("{prefix}{}", self.names.len());
            while self.index.contains_key(&candidate) {
                candidate.push('_');
            }
            self.intern(&candidate);
        }
    }
}

/// One observed rating.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: UserId,
    pub item: ItemId,
    pub value: f64,
}

/// Sparse observed ratings over an `n_users x n_items` index space.
///
/// Entries keep insertion order, which is also the order they are written
/// back out in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingsTable {
    n_users: usize,
    n_items: usize,
    entries: Vec<Rating>,
    lookup: HashMap<(usize, usize), usize>,
}

impl RatingsTable {
    pub fn new(n_users: usize, n_items: usize) -> Self {
        Self {
            n_users,
            n_items,
            entries: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    pub fn from_entries<I>(n_users: usize, n_items: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut table = Self::new(n_users, n_items);
        for (u, i, v) in entries {
            table.insert(UserId(u), ItemId(i), v)?;
        }
        Ok(table)
    }

    /// Adds an observed rating. Duplicate `(user, item)` pairs are rejected.
    pub fn insert(&mut self, user: UserId, item: ItemId, value: f64) -> Result<()> {
        check_index("user", user.0, self.n_users)?;
        check_index("item", item.0, self.n_items)?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidRating(value));
        }
        if self.lookup.contains_key(&(user.0, item.0)) {
            return Err(Error::DuplicateRating {
                user: user.0,
                item: item.0,
            });
        }
        self.lookup.insert((user.0, item.0), self.entries.len());
        self.entries.push(Rating { user, item, value });
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Observation mask: true iff `(user, item)` has a rating.
    pub fn is_observed(&self, user: UserId, item: ItemId) -> bool {
        self.lookup.contains_key(&(user.0, item.0))
    }

    pub fn get(&self, user: UserId, item: ItemId) -> Option<f64> {
        self.lookup
            .get(&(user.0, item.0))
            .map(|&idx| self.entries[idx].value)
    }

    /// Same entries over a wider index space. Shrinking is not allowed.
    pub fn resized(mut self, n_users: usize, n_items: usize) -> Result<Self> {
        if n_users < self.n_users || n_items < self.n_items {
            return Err(Error::DimensionMismatch(format!(
                "cannot shrink ratings from {}x{} to {}x{}",
                self.n_users, self.n_items, n_users, n_items
            )));
        }
        self.n_users = n_users;
        self.n_items = n_items;
        Ok(self)
    }

    /// Empty table over the same index space.
    pub fn empty_like(&self) -> Self {
        Self::new(self.n_users, self.n_items)
    }

    /// Smallest and largest observed value, if any.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut it = self.entries.iter().map(|r| r.value);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }
}

/// Directed social ties over `n_users` users.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SocialGraph {
    n_users: usize,
    edges: Vec<(UserId, UserId)>,
    // sorted out-neighbors per user
    out: Vec<Vec<UserId>>,
}

impl SocialGraph {
    pub fn new(n_users: usize) -> Self {
        Self {
            n_users,
            edges: Vec::new(),
            out: vec![Vec::new(); n_users],
        }
    }

    pub fn from_edges<I>(n_users: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut graph = Self::new(n_users);
        for (from, to) in edges {
            graph.add_edge(UserId(from), UserId(to))?;
        }
        Ok(graph)
    }

    /// Adds the tie `from -> to`. Returns `false` if it was already present.
    pub fn add_edge(&mut self, from: UserId, to: UserId) -> Result<bool> {
        check_index("user", from.0, self.n_users)?;
        check_index("user", to.0, self.n_users)?;
        if from == to {
            return Err(Error::SelfLoop(from.0));
        }
        let adj = &mut self.out[from.0];
        match adj.binary_search(&to) {
            Ok(_) => Ok(false),
            Err(pos) => {
                adj.insert(pos, to);
                self.edges.push((from, to));
                Ok(true)
            }
        }
    }

    /// Adds the reverse of every existing tie.
    pub fn symmetrize(&mut self) {
        let existing = self.edges.clone();
        for (from, to) in existing {
            // indices already validated
            let _ = self.add_edge(to, from);
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn edges(&self) -> &[(UserId, UserId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn has_edge(&self, from: UserId, to: UserId) -> bool {
        self.out
            .get(from.0)
            .is_some_and(|adj| adj.binary_search(&to).is_ok())
    }

    /// Users `y` with a tie `x -> y`, ascending. Incoming ties do not count.
    pub fn neighborhood(&self, x: UserId) -> Result<&[UserId]> {
        check_index("user", x.0, self.n_users)?;
        Ok(&self.out[x.0])
    }

    /// For every user `x`, the users `z` with a tie `z -> x`, ascending.
    pub fn reverse_adjacency(&self) -> Vec<Vec<UserId>> {
        let mut rev = vec![Vec::new(); self.n_users];
        for (from, adj) in self.out.iter().enumerate() {
            for to in adj {
                rev[to.0].push(UserId(from));
            }
        }
        rev
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.has_edge(b, a))
    }

    pub fn resized(mut self, n_users: usize) -> Result<Self> {
        if n_users < self.n_users {
            return Err(Error::DimensionMismatch(format!(
                "cannot shrink social graph from {} to {} users",
                self.n_users, n_users
            )));
        }
        self.n_users = n_users;
        self.out.resize(n_users, Vec::new());
        Ok(self)
    }
}

/// Summary counts for a network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrnStats {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    pub edges: usize,
    /// `ratings / (users * items)`, or 0 for an empty index space.
    pub density: f64,
}

impl fmt::Display for SrnStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "users={} items={} ratings={} edges={} density={:.4}",
            self.users, self.items, self.ratings, self.edges, self.density
        )
    }
}

/// Ratings and social ties over one shared user index space.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialRatingNetwork {
    ratings: RatingsTable,
    social: SocialGraph,
    users: Labels,
    items: Labels,
}

/// Validates and pairs a ratings table with a social graph.
pub fn build_srn(ratings: RatingsTable, social: SocialGraph) -> Result<SocialRatingNetwork> {
    SocialRatingNetwork::new(ratings, social)
}

impl SocialRatingNetwork {
    /// Builds a network with generated labels `u0..`, `i0..`.
    pub fn new(ratings: RatingsTable, social: SocialGraph) -> Result<Self> {
        let users = Labels::sequential("u", ratings.n_users());
        let items = Labels::sequential("i", ratings.n_items());
        Self::with_labels(ratings, social, users, items)
    }

    pub fn with_labels(
        ratings: RatingsTable,
        social: SocialGraph,
        users: Labels,
        items: Labels,
    ) -> Result<Self> {
        if ratings.n_users() != social.n_users() {
            return Err(Error::DimensionMismatch(format!(
                "ratings cover {} users but social graph covers {}",
                ratings.n_users(),
                social.n_users()
            )));
        }
        if users.len() != ratings.n_users() || items.len() != ratings.n_items() {
            return Err(Error::DimensionMismatch(format!(
                "{} user labels and {} item labels for a {}x{} table",
                users.len(),
                items.len(),
                ratings.n_users(),
                ratings.n_items()
            )));
        }
        Ok(Self {
            ratings,
            social,
            users,
            items,
        })
    }

    /// Ratings with no ties.
    pub fn ratings_only(ratings: RatingsTable) -> Self {
        let social = SocialGraph::new(ratings.n_users());
        Self::new(ratings, social).expect("empty graph matches ratings")
    }

    /// Joins tables whose user and item counts may be short of the label
    /// counts (users that only appear in the edges file, for instance).
    pub(crate) fn assemble(
        ratings: RatingsTable,
        social: SocialGraph,
        mut users: Labels,
        mut items: Labels,
    ) -> Result<Self> {
        let n_users = users.len().max(ratings.n_users()).max(social.n_users());
        let n_items = items.len().max(ratings.n_items());
        users.pad_to("u", n_users);
        items.pad_to("i", n_items);
        Self::with_labels(
            ratings.resized(n_users, n_items)?,
            social.resized(n_users)?,
            users,
            items,
        )
    }

    pub fn ratings(&self) -> &RatingsTable {
        &self.ratings
    }

    pub fn social(&self) -> &SocialGraph {
        &self.social
    }

    pub fn user_labels(&self) -> &Labels {
        &self.users
    }

    pub fn item_labels(&self) -> &Labels {
        &self.items
    }

    pub fn n_users(&self) -> usize {
        self.ratings.n_users()
    }

    pub fn n_items(&self) -> usize {
        self.ratings.n_items()
    }

    pub fn neighborhood(&self, x: UserId) -> Result<&[UserId]> {
        self.social.neighborhood(x)
    }

    /// Same users, items and ties with a different ratings table (a training
    /// split, for instance).
    pub fn with_ratings(&self, ratings: RatingsTable) -> Result<Self> {
        if ratings.n_users() != self.n_users() || ratings.n_items() != self.n_items() {
            return Err(Error::DimensionMismatch(format!(
                "replacement ratings are {}x{}, network is {}x{}",
                ratings.n_users(),
                ratings.n_items(),
                self.n_users(),
                self.n_items()
            )));
        }
        Ok(Self {
            ratings,
            social: self.social.clone(),
            users: self.users.clone(),
            items: self.items.clone(),
        })
    }

    pub fn stats(&self) -> SrnStats {
        let cells = self.n_users() * self.n_items();
        SrnStats {
            users: self.n_users(),
            items: self.n_items(),
            ratings: self.ratings.len(),
            edges: self.social.edge_count(),
            density: if cells == 0 {
                0.0
            } else {
                self.ratings.len() as f64 / cells as f64
            },
        }
    }
}

/// Expected rating scale, used for clamping predictions and as the last
/// fallback of the naive predictor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParam(format!(
                "rating scale needs finite min < max, got {min}:{max}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.max)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self { min: 1.0, max: 5.0 }
    }
}

impl FromStr for RatingScale {
    type Err = Error;

    /// Parses `min:max`, e.g. `1:5`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParam(format!("scale {s:?} is not min:max")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParam(format!("scale bound {t:?}: {e}")))
        };
        Self::new(parse(lo)?, parse(hi)?)
    }
}

impl fmt::Display for RatingScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

fn check_index(kind: &'static str, index: usize, count: usize) -> Result<()> {
    if index >= count {
        Err(Error::IndexOutOfRange { kind, index, count })
    } else {
        Ok(())
    }
}
