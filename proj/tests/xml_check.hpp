#pragma once

// Strict XML parsing for emitted SVG, via Boost.PropertyTree.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace xmlcheck {

using Tree = boost::property_tree::ptree;

inline Tree parse(const std::string& doc) {
    std::istringstream in(doc);
    Tree t;
    boost::property_tree::read_xml(in, t);
    return t;
}

inline bool well_formed(const std::string& doc) {
    try {
        parse(doc);
        return true;
    } catch (const boost::property_tree::xml_parser_error&) {
        return false;
    }
}

inline std::string attr(const Tree& e, const std::string& name) { return e.get<std::string>("<xmlattr>." + name, ""); }

// Every element named `tag` anywhere below t, optionally filtered by class.
inline void collect(const Tree& t, const std::string& tag, const std::string& cls, std::vector<Tree>& out) {
    for (const auto& [key, child] : t) {
        if (key == tag && (cls.empty() || attr(child, "class") == cls)) out.push_back(child);
        if (key != "<xmlattr>") collect(child, tag, cls, out);
    }
}

inline std::vector<Tree> find(const std::string& doc, const std::string& tag, const std::string& cls = "") {
    std::vector<Tree> out;
    collect(parse(doc), tag, cls, out);
    return out;
}

}  // namespace xmlcheck
