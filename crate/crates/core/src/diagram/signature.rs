use std::collections::BTreeMap;
use std::sync::Arc;

use super::{BoxSignature, Diagram, DiagramError, Sort, SystemLabel};

/// The declared systems and generator boxes of a theory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    systems: BTreeMap<String, SystemLabel>,
    boxes: BTreeMap<String, Arc<BoxSignature>>,
    box_order: Vec<String>,
}

/// Building blocks accepted by [`Signature::primitive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive<'a> {
    Identity(&'a str),
    Swap(&'a str, &'a str),
    Discard(&'a str),
    Uniform(&'a str),
    Box(&'a str),
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_system(&mut self, name: &str, sort: Sort) -> Result<SystemLabel, DiagramError> {
        if self.systems.contains_key(name) {
            return Err(DiagramError::DuplicateSystem(name.to_string()));
        }
        let label = SystemLabel::new(name, sort);
        self.systems.insert(name.to_string(), label.clone());
        Ok(label)
    }

    pub fn declare_box(
        &mut self,
        name: &str,
        inputs: &[&str],
        outputs: &[&str],
    ) -> Result<Arc<BoxSignature>, DiagramError> {
        if self.boxes.contains_key(name) {
            return Err(DiagramError::DuplicateBox(name.to_string()));
        }
        let inputs = self.labels(inputs)?;
        let outputs = self.labels(outputs)?;
        let sig = Arc::new(BoxSignature::generator(name, inputs, outputs));
        self.boxes.insert(name.to_string(), sig.clone());
        self.box_order.push(name.to_string());
        Ok(sig)
    }

    pub fn system(&self, name: &str) -> Result<&SystemLabel, DiagramError> {
        self.systems
            .get(name)
            .ok_or_else(|| DiagramError::UnknownSystem(name.to_string()))
    }

    pub fn labels(&self, names: &[&str]) -> Result<Vec<SystemLabel>, DiagramError> {
        names.iter().map(|n| self.system(n).cloned()).collect()
    }

    pub fn get_box(&self, name: &str) -> Result<&Arc<BoxSignature>, DiagramError> {
        self.boxes
            .get(name)
            .ok_or_else(|| DiagramError::UnknownBox(name.to_string()))
    }

    pub fn systems(&self) -> impl Iterator<Item = &SystemLabel> {
        self.systems.values()
    }

    /// Generator boxes in declaration order.
    pub fn boxes(&self) -> impl Iterator<Item = &Arc<BoxSignature>> {
        self.box_order.iter().map(|n| &self.boxes[n])
    }

    pub fn primitive(&self, p: Primitive<'_>) -> Result<Diagram, DiagramError> {
        Ok(match p {
            Primitive::Identity(a) => Diagram::identity(self.system(a)?),
            Primitive::Swap(a, b) => Diagram::swap(self.system(a)?, self.system(b)?),
            Primitive::Discard(a) => Diagram::discard(self.system(a)?),
            Primitive::Uniform(a) => Diagram::uniform(self.system(a)?),
            Primitive::Box(f) => Diagram::single(self.get_box(f)?.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut s = Signature::new();
        s.declare_system("A", Sort::Normal).unwrap();
        assert_eq!(
            s.declare_system("A", Sort::Exotic),
            Err(DiagramError::DuplicateSystem("A".into()))
        );
        assert_eq!(s.system("A").unwrap().sort(), Sort::Normal);
        s.declare_box("f", &["A"], &["A"]).unwrap();
        assert!(matches!(s.declare_box("f", &[], &["A"]), Err(DiagramError::DuplicateBox(_))));
        assert!(matches!(s.declare_box("g", &["B"], &[]), Err(DiagramError::UnknownSystem(_))));
    }

    #[test]
    fn primitives() {
        let mut s = Signature::new();
        s.declare_system("A", Sort::Normal).unwrap();
        s.declare_system("B", Sort::Normal).unwrap();
        s.declare_box("f", &["A"], &["B"]).unwrap();
        let id = s.primitive(Primitive::Identity("A")).unwrap();
        assert!(id.nodes().is_empty());
        let f = s.primitive(Primitive::Box("f")).unwrap();
        assert_eq!(f.nodes().len(), 1);
        assert!(matches!(
            s.primitive(Primitive::Box("g")),
            Err(DiagramError::UnknownBox(_))
        ));
        assert!(matches!(
            s.primitive(Primitive::Discard("C")),
            Err(DiagramError::UnknownSystem(_))
        ));
    }
}
