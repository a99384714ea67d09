#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relclass/errors.hpp"

namespace relclass {

// One span of an annotated abstract: either plain character data or an
// entity mention carrying its id.
struct Segment {
  enum class Kind { Plain, Entity };
  Kind kind;
  std::string id;       // entity id, empty for plain segments
  std::string surface;  // character data
};

// An annotated abstract. Entity ids are unique within the document and share
// the document id as a dotted prefix ("E89-1006.1" inside "E89-1006").
struct AbstractDoc {
  std::string id;
  std::vector<Segment> segments;
};

// One line of a relation file: TYPE(ID1,ID2[,REVERSE]).
struct RelationLabel {
  std::string rel_type;
  std::string e1;
  std::string e2;
  bool reversed = false;
};

// An unlabeled entity pair, used for prediction input.
struct EntityPair {
  std::string e1;
  std::string e2;
};

// A relation mention in the internal representation: the normalized token
// span from the entity-1 head through the entity-2 head, inclusive. Direction
// is folded into the label string as a " REVERSE" suffix.
struct RelationInstance {
  std::string abstract_id;
  std::vector<std::string> tokens;  // tokens[0] = e1 head, tokens.back() = e2 head
  std::string e1_id;
  std::string e2_id;
  std::optional<std::string> label;  // absent for test data
  std::size_t sentence_len = 0;

  std::size_t inner_len() const { return tokens.size() - 2; }
};

// Result of normalizing one abstract: whitespace-split tokens with
// punctuation-only tokens merged into the preceding word, multi-word entity
// surfaces joined with underscores, and the post-merge token position of
// every entity.
struct NormalizedDoc {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::size_t> entity_pos;
  // sentence_span[i] = token count of the best-effort sentence containing
  // token i.
  std::vector<std::size_t> sentence_len_at;
};

// Parses annotated abstracts. Entity markup is <entity id="ID">surface</entity>;
// <text id="ID"> wrappers delimit documents and any other tag is treated as
// transparent structure. A stream with no <text> wrapper yields a single
// document whose id is inferred from its entity ids.
std::vector<AbstractDoc> parse_abstracts(std::istream& in);

// Parses TYPE(ID1,ID2[,REVERSE]) lines. '#' starts a comment line; blank
// lines are skipped.
std::vector<RelationLabel> parse_relations(std::istream& in);

// Parses prediction input: either bare "ID1,ID2" lines or full relation
// lines whose type and direction are ignored.
std::vector<EntityPair> parse_entity_pairs(std::istream& in);

NormalizedDoc normalize_tokens(const AbstractDoc& doc);

// Joins internal whitespace of an entity surface with underscores. This is
// the token form entity mentions take after normalization.
std::string entity_token(const std::string& surface);

std::vector<RelationInstance> extract_instances(const std::vector<AbstractDoc>& docs,
                                                const std::vector<RelationLabel>& labels);
std::vector<RelationInstance> extract_instances(const std::vector<AbstractDoc>& docs,
                                                const std::vector<EntityPair>& pairs);

// "E89-1006.1" -> "E89-1006". Empty when the id has no dot.
std::string abstract_prefix(const std::string& entity_id);

}  // namespace relclass
