use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{detect_lexicographic, enumerate_preferences, validate_separable, Guards, MarketShape, Preference};
use crate::error::{GuardError, ModelError};

/// Which preference domain a market or profile space is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainTag {
    Strict,
    Separable,
    Lexicographic,
    /// Lexicographic preferences sharing one importance order.
    LexCommon,
}

impl DomainTag {
    pub const ALL: [DomainTag; 4] = [
        DomainTag::Strict,
        DomainTag::Separable,
        DomainTag::Lexicographic,
        DomainTag::LexCommon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Strict => "strict",
            DomainTag::Separable => "separable",
            DomainTag::Lexicographic => "lexicographic",
            DomainTag::LexCommon => "lex-common",
        }
    }

    /// Whether every preference of this domain carries marginals.
    pub fn is_separable(self) -> bool {
        self != DomainTag::Strict
    }

    pub fn is_lexicographic(self) -> bool {
        matches!(self, DomainTag::Lexicographic | DomainTag::LexCommon)
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown domain `{s}` (expected strict, separable, lexicographic or lex-common)"))
    }
}

/// A market `(N, e, R)`: shape, one preference per agent, and the domain they belong to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Market {
    shape: MarketShape,
    profile: Vec<Preference>,
    domain: DomainTag,
}

impl Market {
    /// Validates the profile against the domain, attaching separable or lexicographic
    /// structure to preferences that were given as plain rankings.
    pub fn new(shape: MarketShape, profile: Vec<Preference>, domain: DomainTag) -> Result<Self, ModelError> {
        if profile.len() != shape.agents() {
            return Err(ModelError::ProfileLength {
                got: profile.len(),
                expected: shape.agents(),
            });
        }
        let mut out = Vec::with_capacity(profile.len());
        for (agent, pref) in profile.into_iter().enumerate() {
            if pref.shape() != shape {
                return Err(ModelError::ShapeMismatch { agent });
            }
            let mismatch = || ModelError::DomainMismatch {
                agent,
                domain: domain.to_string(),
            };
            let pref = match domain {
                DomainTag::Strict => pref,
                DomainTag::Separable => match pref.marginals() {
                    Some(_) => pref,
                    None => validate_separable(&pref)?,
                },
                DomainTag::Lexicographic | DomainTag::LexCommon => {
                    if pref.importance().is_some() {
                        pref
                    } else {
                        let pi = detect_lexicographic(&pref).ok_or_else(mismatch)?;
                        let marginals = validate_separable(&pref)?
                            .marginals()
                            .expect("validated")
                            .to_vec();
                        Preference::lexicographic(shape, marginals, pi)?
                    }
                }
            };
            out.push(pref);
        }
        if domain == DomainTag::LexCommon {
            if let Some(agent) = (1..out.len()).find(|&i| out[i].importance() != out[0].importance()) {
                return Err(ModelError::ImportanceMismatch { agent });
            }
        }
        Ok(Self {
            shape,
            profile: out,
            domain,
        })
    }

    /// The most specific domain every declared structure supports without inference:
    /// strict if any preference is a bare ranking, separable if any lacks an importance
    /// order, lexicographic otherwise.
    pub fn declared_domain(profile: &[Preference]) -> DomainTag {
        if profile.iter().any(|p| p.marginals().is_none()) {
            DomainTag::Strict
        } else if profile.iter().any(|p| p.importance().is_none()) {
            DomainTag::Separable
        } else {
            DomainTag::Lexicographic
        }
    }

    pub(crate) fn from_parts(shape: MarketShape, profile: Vec<Preference>, domain: DomainTag) -> Self {
        Self {
            shape,
            profile,
            domain,
        }
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    pub fn agents(&self) -> usize {
        self.shape.agents()
    }

    pub fn types(&self) -> usize {
        self.shape.types()
    }

    pub fn profile(&self) -> &[Preference] {
        &self.profile
    }

    pub fn preference(&self, agent: usize) -> &Preference {
        &self.profile[agent]
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    /// Same market with agent `agent` reporting `pref` instead.
    pub fn with_preference(&self, agent: usize, pref: Preference) -> Result<Self, ModelError> {
        let mut profile = self.profile.clone();
        profile[agent] = pref;
        Self::new(self.shape, profile, self.domain)
    }
}

/// A finite product space of profiles: agent `i` chooses among `options[i]`.
///
/// Profile index is mixed radix over agents, agent 0 most significant.
#[derive(Clone, Debug)]
pub struct ProfileDomain {
    shape: MarketShape,
    tag: DomainTag,
    options: Vec<Vec<Preference>>,
    len: usize,
}

impl ProfileDomain {
    /// Every profile of the domain.
    pub fn full(shape: MarketShape, tag: DomainTag, guards: &Guards) -> Result<Self, GuardError> {
        let prefs: Vec<Preference> = enumerate_preferences(shape, tag, guards)?.collect();
        Self::from_options(shape, tag, vec![prefs; shape.agents()], guards)
    }

    pub fn from_options(
        shape: MarketShape,
        tag: DomainTag,
        options: Vec<Vec<Preference>>,
        guards: &Guards,
    ) -> Result<Self, GuardError> {
        assert_eq!(options.len(), shape.agents(), "one option list per agent");
        let len = options
            .iter()
            .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
            .filter(|&l| l <= guards.max_profiles);
        let Some(len) = len else {
            let required = options
                .iter()
                .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));
            return Err(GuardError::new(
                format!("enumerate {tag} profiles at {shape}"),
                format!("{required} profiles"),
                format!("{} profiles", guards.max_profiles),
            ));
        };
        Ok(Self {
            shape,
            tag,
            options,
            len,
        })
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn options(&self, agent: usize) -> &[Preference] {
        &self.options[agent]
    }

    /// Option index chosen by each agent in profile `index`.
    pub fn choices(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.agents()];
        for (slot, opts) in out.iter_mut().zip(&self.options).rev() {
            *slot = index % opts.len();
            index /= opts.len();
        }
        out
    }

    pub fn index_of(&self, choices: &[usize]) -> usize {
        choices
            .iter()
            .zip(&self.options)
            .fold(0, |acc, (&c, opts)| acc * opts.len() + c)
    }

    /// Index of the profile where agent `agent` switches to option `option`.
    pub fn deviate(&self, index: usize, agent: usize, option: usize) -> usize {
        let mut choices = self.choices(index);
        choices[agent] = option;
        self.index_of(&choices)
    }

    pub fn market(&self, index: usize) -> Market {
        let profile = self
            .choices(index)
            .iter()
            .zip(&self.options)
            .map(|(&c, opts)| opts[c].clone())
            .collect();
        Market::from_parts(self.shape, profile, self.tag)
    }

    /// Option index of `pref` in agent `agent`'s list, matched by ranking.
    pub fn option_of(&self, agent: usize, pref: &Preference) -> Option<usize> {
        self.options[agent].iter().position(|p| p.order() == pref.order())
    }

    pub fn index_of_market(&self, market: &Market) -> Option<usize> {
        let choices: Option<Vec<usize>> = (0..self.shape.agents())
            .map(|i| self.option_of(i, market.preference(i)))
            .collect();
        choices.map(|c| self.index_of(&c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MarginalPreference;

    fn lex(shape: MarketShape, m: &[&[usize]], pi: &[usize]) -> Preference {
        let marginals = m
            .iter()
            .enumerate()
            .map(|(t, r)| MarginalPreference::new(t, r.to_vec()).unwrap())
            .collect();
        Preference::lexicographic(shape, marginals, pi.to_vec()).unwrap()
    }

    #[test]
    fn domain_tags_parse() {
        for t in DomainTag::ALL {
            assert_eq!(t.name().parse::<DomainTag>().unwrap(), t);
        }
        assert!("lex".parse::<DomainTag>().is_err());
    }

    #[test]
    fn lexicographic_structure_is_inferred() {
        let s = MarketShape::new(2, 2).unwrap();
        let a = lex(s, &[&[1, 0], &[0, 1]], &[1, 0]);
        let b = lex(s, &[&[0, 1], &[0, 1]], &[0, 1]);
        let m = Market::new(s, vec![a.as_strict(), b.as_strict()], DomainTag::Lexicographic).unwrap();
        assert_eq!(m.preference(0).importance(), Some(&[1, 0][..]));
        let err = Market::new(s, vec![a, b], DomainTag::LexCommon).unwrap_err();
        assert_eq!(err, ModelError::ImportanceMismatch { agent: 1 });
    }

    #[test]
    fn non_lexicographic_rejected() {
        let s = MarketShape::new(2, 3).unwrap();
        let sep: Vec<Preference> = enumerate_preferences(s, DomainTag::Separable, &Guards::default())
            .unwrap()
            .collect();
        let odd = sep.iter().find(|p| detect_lexicographic(p).is_none()).unwrap();
        let err = Market::new(s, vec![odd.clone(), odd.clone()], DomainTag::Lexicographic).unwrap_err();
        assert!(matches!(err, ModelError::DomainMismatch { agent: 0, .. }));
    }

    #[test]
    fn profile_indexing_round_trip() {
        let s = MarketShape::new(2, 2).unwrap();
        let d = ProfileDomain::full(s, DomainTag::Separable, &Guards::default()).unwrap();
        assert_eq!(d.len(), 64);
        for idx in 0..d.len() {
            assert_eq!(d.index_of(&d.choices(idx)), idx);
            assert_eq!(d.index_of_market(&d.market(idx)), Some(idx));
        }
        assert_eq!(d.choices(9), vec![1, 1]);
        assert_eq!(d.deviate(9, 0, 3), 25);
    }

    #[test]
    fn profile_guard() {
        let s = MarketShape::new(2, 2).unwrap();
        let g = Guards {
            max_profiles: 100,
            ..Guards::default()
        };
        let err = ProfileDomain::full(s, DomainTag::Strict, &g).unwrap_err();
        assert_eq!(err.required, "576 profiles");
    }
}
