pub mod annotator;
pub mod document;
pub mod formula;
pub mod interface;
pub mod ontology;
pub mod rdf;
pub mod recommender;
pub mod search;
