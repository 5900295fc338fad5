use crate::mechanisms::{Pointee, TradingCycle};
use crate::model::{Allocation, Bundle, MarketShape, TypedObject};

/// Names of the object types. Objects are labelled `<name><owner>` with 1-based owners,
/// so type names must be nonempty and must not end in a digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeNames(Vec<String>);

impl TypeNames {
    pub fn new(names: Vec<String>) -> Result<Self, String> {
        for (t, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(format!("type name {} is empty", t + 1));
            }
            if !name.chars().all(|c| c.is_alphabetic() || c == '_') {
                return Err(format!("type name `{name}` must consist of letters and underscores"));
            }
            if names[..t].contains(name) {
                return Err(format!("duplicate type name `{name}`"));
            }
        }
        Ok(Self(names))
    }

    /// `A`, `B`, `C`, ...; past `Z` the letters repeat (`AA`, `BB`, ...).
    pub fn default_for(m: usize) -> Self {
        Self(
            (0..m)
                .map(|t| {
                    let letter = char::from(b'A' + (t % 26) as u8);
                    letter.to_string().repeat(t / 26 + 1)
                })
                .collect(),
        )
    }

    /// `H` and `C`: houses and cars.
    pub fn houses_and_cars() -> Self {
        Self(vec!["H".into(), "C".into()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, ty: usize) -> &str {
        &self.0[ty]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn object(&self, ty: usize, owner: usize) -> String {
        format!("{}{}", self.0[ty], owner + 1)
    }

    pub fn bundle(&self, bundle: &Bundle) -> String {
        let parts: Vec<String> = bundle.owners().iter().enumerate().map(|(t, &o)| self.object(t, o)).collect();
        format!("({})", parts.join(","))
    }

    pub fn parse_object(&self, shape: MarketShape, label: &str) -> Result<TypedObject, String> {
        let label = label.trim();
        let split = label
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| format!("object label `{label}` has no owner number"))?;
        let (name, owner) = label.split_at(split);
        let ty = self
            .index_of(name)
            .ok_or_else(|| format!("unknown type `{name}` in object label `{label}`"))?;
        let owner: usize = owner
            .parse()
            .map_err(|_| format!("bad owner number in object label `{label}`"))?;
        if owner == 0 || owner > shape.agents() {
            return Err(format!("owner {owner} in `{label}` is outside 1..={}", shape.agents()));
        }
        Ok(TypedObject { ty, owner: owner - 1 })
    }

    /// Parses `(H2,C1)`; objects must appear in type order.
    pub fn parse_bundle(&self, shape: MarketShape, label: &str) -> Result<Bundle, String> {
        let inner = label
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| format!("bundle `{label}` must be parenthesized"))?;
        let objects: Vec<TypedObject> = inner
            .split(',')
            .map(|o| self.parse_object(shape, o))
            .collect::<Result<_, _>>()?;
        if objects.len() != shape.types() || objects.iter().enumerate().any(|(t, o)| o.ty != t) {
            return Err(format!("bundle `{label}` must list one object of each type in type order"));
        }
        Ok(Bundle::from_owners(objects.into_iter().map(|o| o.owner).collect()))
    }
}

/// Tuple of allotments, e.g. `((H2,C2),(H1,C1))`.
pub fn render_allocation(alloc: &Allocation, names: &TypeNames) -> String {
    let rows: Vec<String> = alloc.rows().iter().map(|b| names.bundle(b)).collect();
    format!("({})", rows.join(","))
}

/// One line per agent, e.g. `agent 1: (H2, C2)`.
pub fn render_allotments(alloc: &Allocation, names: &TypeNames) -> String {
    alloc
        .rows()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let objects: Vec<String> = b.owners().iter().enumerate().map(|(t, &o)| names.object(t, o)).collect();
            format!("agent {}: ({})\n", i + 1, objects.join(", "))
        })
        .collect()
}

/// Inverse of [`render_allocation`]; whitespace is ignored.
pub fn parse_allocation(text: &str, shape: MarketShape, names: &TypeNames) -> Result<Allocation, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("allocation `{text}` must be parenthesized"))?;
    let mut rows = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let end = rest
            .find(')')
            .ok_or_else(|| format!("unbalanced parentheses in `{text}`"))?;
        rows.push(names.parse_bundle(shape, &rest[..=end])?);
        rest = rest[end + 1..].strip_prefix(',').unwrap_or(&rest[end + 1..]);
    }
    Allocation::new(shape, rows).map_err(|e| e.to_string())
}

/// A trading cycle with 1-based agents and labelled objects, e.g.
/// `1 -> H2 -> 2 -> C1 -> 1`; whole endowments show as `e2`.
pub fn render_cycle(cycle: &TradingCycle, names: &TypeNames) -> String {
    let mut parts = Vec::with_capacity(2 * cycle.links.len() + 1);
    for link in &cycle.links {
        parts.push((link.agent + 1).to_string());
        parts.push(match link.points_to {
            Pointee::Object(o) => names.object(o.ty, o.owner),
            Pointee::Endowment(owner) => format!("e{}", owner + 1),
        });
    }
    parts.push((cycle.links[0].agent + 1).to_string());
    parts.join(" -> ")
}
