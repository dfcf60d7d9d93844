#include "stmreg/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace stmreg {

namespace {

struct RawLine {
  int number = 0;
  std::string text;
};

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

// Splits on commas that sit outside parentheses.
std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!trim(current).empty() || !out.empty()) out.push_back(trim(current));
  return out;
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

struct Atom {
  std::string predicate;
  std::vector<std::string> args;
};

class Parser {
 public:
  Parser(const std::string& text, std::string name) : name_(std::move(name)) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (!line.empty()) lines_.push_back(RawLine{number, line});
    }
  }

  Scenario run() {
    scenario_.name = name_;
    collect_sections();
    process_types();
    process_consultants();
    index_entities();
    process_buffer_defaults();
    process_config();
    process_facts();
    process_script();
    validate();
    return std::move(scenario_);
  }

 private:
  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ScenarioError(name_ + ":" + std::to_string(line) + ": " + message);
  }

  Atom parse_atom(int line, const std::string& text) const {
    std::size_t open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
      fail(line, "expected predicate(arg,...) but found '" + text + "'");
    Atom atom;
    atom.predicate = trim(text.substr(0, open));
    if (!valid_identifier(atom.predicate))
      fail(line, "invalid predicate name '" + atom.predicate + "'");
    std::string inner = text.substr(open + 1, text.size() - open - 2);
    for (const std::string& arg : split_top_level(inner)) {
      if (arg.empty()) fail(line, "empty argument in '" + text + "'");
      atom.args.push_back(arg);
    }
    if (atom.args.empty()) fail(line, "predicate '" + atom.predicate + "' needs arguments");
    return atom;
  }

  double parse_probability(int line, const std::string& token) const {
    try {
      std::size_t used = 0;
      double p = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      if (p < 0.0 || p > 1.0) fail(line, "probability " + token + " outside [0,1]");
      return p;
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception&) {
      fail(line, "invalid probability '" + token + "'");
    }
  }

  std::uint64_t parse_count(int line, const std::string& token) const {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      fail(line, "invalid integer '" + token + "'");
    }
  }

  BufferConfig parse_buffer(int line, const std::vector<std::string>& tokens) const {
    if (tokens.empty()) fail(line, "buffer needs a policy");
    auto policy = parse_buffer_policy(tokens[0]);
    if (!policy)
      fail(line, "unknown buffer policy '" + tokens[0] +
                     "' (capacity_fifo, capacity_lru, decay, interference)");
    BufferConfig config;
    config.policy = *policy;
    bool have_capacity = false, have_ttl = false;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      std::size_t eq = tokens[i].find('=');
      if (eq == std::string::npos) fail(line, "expected key=value, found '" + tokens[i] + "'");
      std::string key = tokens[i].substr(0, eq);
      std::string value = tokens[i].substr(eq + 1);
      if (key == "capacity") {
        config.capacity = parse_count(line, value);
        have_capacity = true;
        if (config.capacity == 0) fail(line, "capacity must be positive");
      } else if (key == "ttl") {
        config.ttl_ticks = parse_count(line, value);
        have_ttl = true;
        if (config.ttl_ticks == 0) fail(line, "ttl must be positive");
      } else if (key == "scope") {
        auto scope = parse_buffer_scope(value);
        if (!scope) fail(line, "unknown buffer scope '" + value + "'");
        config.scope = *scope;
      } else {
        fail(line, "unknown buffer attribute '" + key + "'");
      }
    }
    bool needs_capacity = config.policy != BufferPolicy::decay;
    if (needs_capacity && !have_capacity)
      fail(line, std::string(to_string(config.policy)) + " requires capacity=<n>");
    if (config.policy == BufferPolicy::decay && !have_ttl)
      fail(line, "decay requires ttl=<n>");
    return config;
  }

  void collect_sections() {
    std::string section;
    std::string consultant_id;
    for (const RawLine& raw : lines_) {
      if (raw.text.front() == '[') {
        if (raw.text.back() != ']') fail(raw.number, "unterminated section header");
        std::string header = trim(raw.text.substr(1, raw.text.size() - 2));
        auto tokens = split_ws(header);
        if (tokens.empty()) fail(raw.number, "empty section header");
        if (tokens[0] == "consultant") {
          if (tokens.size() != 2) fail(raw.number, "[consultant <id>] expects one id");
          if (!valid_identifier(tokens[1]))
            fail(raw.number, "invalid consultant id '" + tokens[1] + "'");
          section = "consultant";
          consultant_id = tokens[1];
          for (const auto& [id, lines] : consultant_sections_) {
            if (id == consultant_id) fail(raw.number, "duplicate consultant '" + id + "'");
          }
          consultant_sections_.emplace_back(consultant_id,
                                            std::pair{raw.number, std::vector<RawLine>{}});
        } else if (tokens.size() == 1 &&
                   (tokens[0] == "types" || tokens[0] == "facts" || tokens[0] == "config" ||
                    tokens[0] == "buffer" || tokens[0] == "script")) {
          section = tokens[0];
        } else {
          fail(raw.number, "unknown section '" + header + "'");
        }
        continue;
      }
      if (section.empty()) fail(raw.number, "content before any section header");
      if (section == "consultant") {
        consultant_sections_.back().second.second.push_back(raw);
      } else if (section == "types") {
        types_lines_.push_back(raw);
      } else if (section == "facts") {
        facts_lines_.push_back(raw);
      } else if (section == "config") {
        config_lines_.push_back(raw);
      } else if (section == "buffer") {
        buffer_lines_.push_back(raw);
      } else {
        script_lines_.push_back(raw);
      }
    }
  }

  void process_types() {
    for (const RawLine& raw : types_lines_) {
      for (const std::string& token : split_ws(raw.text)) {
        if (!valid_identifier(token)) fail(raw.number, "invalid type name '" + token + "'");
        if (std::find(scenario_.types.begin(), scenario_.types.end(), token) !=
            scenario_.types.end())
          fail(raw.number, "duplicate type '" + token + "'");
        scenario_.types.push_back(token);
      }
    }
  }

  void process_consultants() {
    for (const auto& [id, section] : consultant_sections_) {
      ConsultantDecl decl;
      decl.id = id;
      decl.line = section.first;
      for (const RawLine& raw : section.second) {
        auto tokens = split_ws(raw.text);
        const std::string& keyword = tokens[0];
        if (keyword == "type") {
          if (tokens.size() != 2) fail(raw.number, "type expects one name");
          if (!valid_identifier(tokens[1])) fail(raw.number, "invalid type '" + tokens[1] + "'");
          decl.default_type = tokens[1];
        } else if (keyword == "buffer") {
          decl.buffer = parse_buffer(raw.number,
                                     std::vector<std::string>(tokens.begin() + 1, tokens.end()));
        } else if (keyword == "entity") {
          if (tokens.size() < 2 || tokens.size() > 3)
            fail(raw.number, "entity expects an index and an optional type");
          EntityDecl entity;
          entity.line = raw.number;
          entity.index = static_cast<std::uint32_t>(parse_count(raw.number, tokens[1]));
          if (tokens.size() == 3) {
            if (!valid_identifier(tokens[2]))
              fail(raw.number, "invalid type '" + tokens[2] + "'");
            entity.type = tokens[2];
          }
          for (const EntityDecl& existing : decl.entities) {
            if (existing.index == entity.index)
              fail(raw.number, "duplicate entity index " + tokens[1]);
          }
          decl.entities.push_back(entity);
        } else if (keyword == "catalog") {
          if (tokens.size() < 2) fail(raw.number, "catalog expects a formula");
          decl.catalog.push_back(parse_catalog_entry(raw.number, tokens, decl));
        } else {
          fail(raw.number, "unknown consultant attribute '" + keyword + "'");
        }
      }
      if (decl.default_type.empty()) decl.default_type = decl.id;
      for (EntityDecl& entity : decl.entities) {
        if (entity.type.empty()) entity.type = decl.default_type;
      }
      scenario_.consultants.push_back(std::move(decl));
    }
  }

  CatalogDecl parse_catalog_entry(int line, const std::vector<std::string>& tokens,
                                  const ConsultantDecl& decl) const {
    CatalogDecl entry;
    entry.line = line;
    Atom atom = parse_atom(line, tokens[1]);
    entry.formula.predicate = atom.predicate;
    for (const std::string& arg : atom.args) {
      TypedVar var;
      std::size_t colon = arg.find(':');
      if (colon == std::string::npos) {
        var.name = arg;
        var.type = decl.default_type.empty() ? decl.id : decl.default_type;
      } else {
        var.name = arg.substr(0, colon);
        var.type = arg.substr(colon + 1);
      }
      if (!valid_identifier(var.name) || !valid_identifier(var.type))
        fail(line, "invalid variable declaration '" + arg + "'");
      for (const TypedVar& existing : entry.formula.variables) {
        if (existing.name == var.name)
          fail(line, "variable '" + var.name + "' repeats in " + atom.predicate);
      }
      entry.formula.variables.push_back(std::move(var));
    }
    for (const CatalogDecl& existing : decl.catalog) {
      if (existing.formula.predicate == entry.formula.predicate &&
          existing.formula.arity() == entry.formula.arity())
        fail(line, "duplicate catalog entry " + entry.formula.predicate + "/" +
                       std::to_string(entry.formula.arity()));
    }
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      std::size_t eq = tokens[i].find('=');
      if (eq == std::string::npos) fail(line, "expected key=value, found '" + tokens[i] + "'");
      std::string key = tokens[i].substr(0, eq);
      std::string value = tokens[i].substr(eq + 1);
      if (key == "category") {
        if (!valid_identifier(value)) fail(line, "invalid category '" + value + "'");
        entry.category = value;
      } else if (key == "ttl") {
        Tick ttl = parse_count(line, value);
        if (ttl == 0) fail(line, "ttl must be positive");
        entry.ttl = ttl;
      } else {
        fail(line, "unknown catalog attribute '" + key + "'");
      }
    }
    return entry;
  }

  void index_entities() {
    for (const ConsultantDecl& decl : scenario_.consultants) {
      for (const EntityDecl& entity : decl.entities) {
        EntityRef ref{decl.id, entity.index};
        entity_names_.emplace(ref.str(), ref);
      }
    }
  }

  EntityRef resolve_entity(int line, const std::string& token) const {
    auto it = entity_names_.find(token);
    if (it == entity_names_.end()) fail(line, "unknown entity '" + token + "'");
    return it->second;
  }

  const CatalogDecl* find_catalog(const std::string& predicate, std::size_t arity,
                                  const ConsultantDecl** owner = nullptr) const {
    const CatalogDecl* found = nullptr;
    for (const ConsultantDecl& decl : scenario_.consultants) {
      for (const CatalogDecl& entry : decl.catalog) {
        if (entry.formula.predicate == predicate && entry.formula.arity() == arity) {
          if (found) return nullptr;  // ambiguous across consultants
          found = &entry;
          if (owner) *owner = &decl;
        }
      }
    }
    return found;
  }

  // Canonicalizes "pred(objects_1,...)" against the advertising consultant's
  // catalog formula, positionally.
  BoundProperty parse_ground_property(int line, const std::string& text) const {
    Atom atom = parse_atom(line, text);
    const CatalogDecl* entry = find_catalog(atom.predicate, atom.args.size());
    if (!entry) {
      bool exists_somewhere = false;
      for (const ConsultantDecl& decl : scenario_.consultants) {
        for (const CatalogDecl& c : decl.catalog)
          exists_somewhere |= c.formula.predicate == atom.predicate &&
                              c.formula.arity() == atom.args.size();
      }
      if (exists_somewhere)
        fail(line, "predicate " + atom.predicate + "/" + std::to_string(atom.args.size()) +
                       " is advertised by more than one consultant; facts must be unambiguous");
      fail(line, "predicate " + atom.predicate + "/" + std::to_string(atom.args.size()) +
                     " is advertised by no consultant");
    }
    BoundProperty prop;
    prop.formula = entry->formula;
    for (std::size_t i = 0; i < atom.args.size(); ++i)
      prop.bindings[entry->formula.variables[i].name] = resolve_entity(line, atom.args[i]);
    return prop;
  }

  void process_buffer_defaults() {
    if (buffer_lines_.empty()) return;
    if (buffer_lines_.size() > 1)
      fail(buffer_lines_[1].number, "[buffer] takes a single configuration line");
    scenario_.default_buffer =
        parse_buffer(buffer_lines_[0].number, split_ws(buffer_lines_[0].text));
  }

  void process_config() {
    for (const RawLine& raw : config_lines_) {
      auto tokens = split_ws(raw.text);
      if (tokens.size() != 2) fail(raw.number, "config lines are '<key> <value>'");
      if (tokens[0] == "tau_dph") {
        scenario_.tau_dph = parse_probability(raw.number, tokens[1]);
        if (scenario_.tau_dph <= 0.0 || scenario_.tau_dph >= 1.0)
          fail(raw.number, "tau_dph must lie strictly between 0 and 1");
      } else if (tokens[0] == "tau_resolve") {
        double tau = parse_probability(raw.number, tokens[1]);
        if (tau <= 0.0 || tau >= 1.0)
          fail(raw.number, "tau_resolve must lie strictly between 0 and 1");
        scenario_.tau_resolve = tau;
      } else {
        fail(raw.number, "unknown config key '" + tokens[0] + "'");
      }
    }
  }

  void process_facts() {
    for (const RawLine& raw : facts_lines_) {
      auto tokens = split_ws(raw.text);
      if (tokens.size() != 2) fail(raw.number, "fact lines are '<property> <probability>'");
      FactDecl fact;
      fact.line = raw.number;
      fact.prop = parse_ground_property(raw.number, tokens[0]);
      fact.probability = parse_probability(raw.number, tokens[1]);
      scenario_.facts.push_back(std::move(fact));
    }
  }

  ResolutionQuery parse_query(int line, const std::string& text) const {
    ResolutionQuery query;
    std::vector<std::string> conjuncts = split_top_level(text);
    if (conjuncts.empty() || conjuncts.front().empty()) fail(line, "empty query");
    for (const std::string& conjunct : conjuncts) {
      Atom atom = parse_atom(line, conjunct);
      if (atom.args.size() != 1)
        fail(line, "queries take unary properties only; '" + conjunct + "' is relational");
      const std::string& var = atom.args.front();
      if (!valid_identifier(var) || entity_names_.contains(var))
        fail(line, "query argument '" + var + "' must be a variable");
      if (query.target_variable.empty())
        query.target_variable = var;
      else if (query.target_variable != var)
        fail(line, "query mixes variables '" + query.target_variable + "' and '" + var + "'");
      const CatalogDecl* entry = find_catalog(atom.predicate, 1);
      if (!entry) {
        // Distinguish "nobody advertises it" from "several do": resolution
        // binds one variable, so any advertiser's formula is canonical.
        const CatalogDecl* first = nullptr;
        for (const ConsultantDecl& decl : scenario_.consultants) {
          for (const CatalogDecl& c : decl.catalog) {
            if (c.formula.predicate == atom.predicate && c.formula.arity() == 1 && !first)
              first = &c;
          }
        }
        if (!first)
          fail(line, "predicate " + atom.predicate + "/1 is advertised by no consultant");
        entry = first;
      }
      query.properties.emplace_back(entry->formula, Bindings{});
    }
    return query;
  }

  void process_script() {
    for (const RawLine& raw : script_lines_) {
      auto tokens = split_ws(raw.text);
      std::string word = tokens[0];
      ScriptCommand cmd;
      cmd.line = raw.number;

      std::size_t at = word.find('@');
      if (at != std::string::npos) {
        std::string leg = word.substr(at + 1);
        word = word.substr(0, at);
        if (leg == "sd_pia")
          cmd.leg = LegFilter::sd_pia;
        else if (leg == "dist_pia")
          cmd.leg = LegFilter::dist_pia;
        else
          fail(raw.number, "unknown leg filter '@" + leg + "'");
        if (word.rfind("assert", 0) != 0)
          fail(raw.number, "leg filters apply to assert commands only");
      }

      std::string rest = trim(raw.text.substr(raw.text.find(tokens[0]) + tokens[0].size()));

      if (word == "resolve" || word == "describe-ambiguous") {
        cmd.kind = word == "resolve" ? ScriptCommand::Kind::resolve
                                     : ScriptCommand::Kind::describe_ambiguous;
        cmd.query = parse_query(raw.number, rest);
        cmd.text = word + " " + cmd.query.str();
      } else if (word == "describe") {
        if (tokens.size() != 2) fail(raw.number, "describe expects one entity");
        cmd.kind = ScriptCommand::Kind::describe;
        cmd.entity = resolve_entity(raw.number, tokens[1]);
        cmd.text = "describe " + cmd.entity.str();
      } else if (word == "tick") {
        if (tokens.size() != 2) fail(raw.number, "tick expects a positive count");
        cmd.kind = ScriptCommand::Kind::tick;
        cmd.ticks = parse_count(raw.number, tokens[1]);
        if (cmd.ticks == 0) fail(raw.number, "tick expects a positive count");
        cmd.text = "tick " + tokens[1];
      } else if (word == "impose") {
        if (tokens.size() != 3) fail(raw.number, "impose expects '<property> <probability>'");
        cmd.kind = ScriptCommand::Kind::impose;
        cmd.fact.line = raw.number;
        cmd.fact.prop = parse_ground_property(raw.number, tokens[1]);
        cmd.fact.probability = parse_probability(raw.number, tokens[2]);
        cmd.text = "impose " + cmd.fact.prop.str() + " " + tokens[2];
      } else if (word == "assert-stm" || word == "assert-description") {
        if (tokens.size() < 3)
          fail(raw.number, word + " expects '<entity> <properties|none>'");
        cmd.kind = word == "assert-stm" ? ScriptCommand::Kind::assert_stm
                                        : ScriptCommand::Kind::assert_description;
        cmd.entity = resolve_entity(raw.number, tokens[1]);
        std::string props_text =
            trim(rest.substr(rest.find(tokens[1]) + tokens[1].size()));
        if (props_text != "none") {
          for (const std::string& prop_text : split_top_level(props_text))
            cmd.props.push_back(parse_ground_property(raw.number, prop_text));
        }
        cmd.text = word + (cmd.leg == LegFilter::any
                               ? ""
                               : std::string("@") +
                                     (cmd.leg == LegFilter::sd_pia ? "sd_pia" : "dist_pia")) +
                   " " + cmd.entity.str() + " " + (cmd.props.empty() ? "none" : props_text);
      } else if (word == "assert-ltm-queries") {
        if (tokens.size() != 3) fail(raw.number, "assert-ltm-queries expects '<op> <n>'");
        cmd.kind = ScriptCommand::Kind::assert_ltm_queries;
        static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
        if (std::find_if(std::begin(ops), std::end(ops), [&](const char* op) {
              return tokens[1] == op;
            }) == std::end(ops))
          fail(raw.number, "unknown comparison '" + tokens[1] + "'");
        cmd.comparison = tokens[1];
        cmd.count = parse_count(raw.number, tokens[2]);
        cmd.text = word + (cmd.leg == LegFilter::any
                               ? ""
                               : std::string("@") +
                                     (cmd.leg == LegFilter::sd_pia ? "sd_pia" : "dist_pia")) +
                   " " + tokens[1] + " " + tokens[2];
      } else {
        fail(raw.number, "unknown script command '" + tokens[0] + "'");
      }
      scenario_.script.push_back(std::move(cmd));
    }
  }

  void validate() {
    if (scenario_.consultants.empty())
      throw ScenarioError(name_ + ": scenario declares no consultants");

    bool explicit_types = !scenario_.types.empty();
    auto known_type = [&](const std::string& type) {
      return std::find(scenario_.types.begin(), scenario_.types.end(), type) !=
             scenario_.types.end();
    };

    std::map<std::string, std::pair<std::string, int>> category_by_predicate;
    std::map<std::string, std::pair<Tick, int>> ttl_by_predicate;
    for (const ConsultantDecl& decl : scenario_.consultants) {
      if (explicit_types && !known_type(decl.default_type))
        fail(decl.line, "type '" + decl.default_type + "' is not in the type alphabet");
      for (const EntityDecl& entity : decl.entities) {
        if (explicit_types && !known_type(entity.type))
          fail(entity.line, "type '" + entity.type + "' is not in the type alphabet");
      }
      for (const CatalogDecl& entry : decl.catalog) {
        for (const TypedVar& var : entry.formula.variables) {
          if (explicit_types && !known_type(var.type))
            fail(entry.line, "type '" + var.type + "' is not in the type alphabet");
        }
        if (entry.category) {
          auto [it, inserted] = category_by_predicate.emplace(
              entry.formula.predicate, std::pair{*entry.category, entry.line});
          if (!inserted && it->second.first != *entry.category)
            fail(entry.line, "predicate " + entry.formula.predicate +
                                 " already has category '" + it->second.first +
                                 "' (line " + std::to_string(it->second.second) + ")");
        }
        if (entry.ttl) {
          auto [it, inserted] = ttl_by_predicate.emplace(entry.formula.predicate,
                                                         std::pair{*entry.ttl, entry.line});
          if (!inserted && it->second.first != *entry.ttl)
            fail(entry.line, "predicate " + entry.formula.predicate +
                                 " already has ttl " + std::to_string(it->second.first) +
                                 " (line " + std::to_string(it->second.second) + ")");
        }
      }
    }
  }

  std::string name_;
  std::vector<RawLine> lines_;
  std::vector<std::pair<std::string, std::pair<int, std::vector<RawLine>>>>
      consultant_sections_;
  std::vector<RawLine> types_lines_;
  std::vector<RawLine> facts_lines_;
  std::vector<RawLine> config_lines_;
  std::vector<RawLine> buffer_lines_;
  std::vector<RawLine> script_lines_;
  std::map<std::string, EntityRef> entity_names_;
  Scenario scenario_;
};

}  // namespace

BufferConfig Scenario::buffer_for(const ConsultantDecl& consultant) const {
  if (consultant.buffer) return *consultant.buffer;
  if (default_buffer) return *default_buffer;
  return BufferConfig{};  // capacity_fifo, capacity 7, per_entity
}

std::size_t Scenario::entity_count() const {
  std::size_t n = 0;
  for (const ConsultantDecl& c : consultants) n += c.entities.size();
  return n;
}

std::optional<EntityRef> Scenario::find_entity(const std::string& canonical) const {
  for (const ConsultantDecl& decl : consultants) {
    for (const EntityDecl& entity : decl.entities) {
      EntityRef ref{decl.id, entity.index};
      if (ref.str() == canonical) return ref;
    }
  }
  return std::nullopt;
}

Scenario parse_scenario(const std::string& text, const std::string& name) {
  return Parser(text, name).run();
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.stem().string());
}

std::unique_ptr<World> build_world(const Scenario& scenario) {
  auto world = std::make_unique<World>();
  world->type_alphabet = scenario.types;

  for (const ConsultantDecl& decl : scenario.consultants) {
    for (const CatalogDecl& entry : decl.catalog) {
      if (entry.category)
        world->categories.by_predicate[entry.formula.predicate] = *entry.category;
      if (entry.ttl) world->ttl_overrides[entry.formula.predicate] = *entry.ttl;
    }
  }

  for (const ConsultantDecl& decl : scenario.consultants) {
    Consultant& consultant =
        world->add_consultant(decl.id, decl.default_type, scenario.buffer_for(decl));
    for (const EntityDecl& entity : decl.entities)
      consultant.add_entity(entity.index, entity.type);
    for (const CatalogDecl& entry : decl.catalog) consultant.add_constraint(entry.formula);
  }

  for (const FactDecl& fact : scenario.facts) {
    Consultant& advertiser =
        world->sole_advertiser(fact.prop.formula.predicate, fact.prop.formula.arity());
    for (const auto& [var, entity] : fact.prop.bindings)
      world->owner_of(entity);  // rejects dangling references
    advertiser.impose(fact.prop.formula, fact.prop.bindings, fact.probability);
  }

  return world;
}

}  // namespace stmreg
