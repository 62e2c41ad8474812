#include "xtalbench/checksum.hpp"
#include "xtalbench/gateway.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace xtalbench {

namespace fs = std::filesystem;

std::string Prompt::canonical_text() const {
  std::string out;
  for (const auto& p : parts) {
    if (p.kind == PromptPart::Kind::Text) {
      out += p.text;
    } else {
      out += fmt::format("<image {}>", sha256_file(p.image_path));
    }
    out += '\n';
  }
  return out;
}

std::string prompt_instruction() {
  std::string s = fmt::format("[{}]\n", kPromptVersion);
  s +=
      "Predict the Material Properties record for the query structure above. Reply with one JSON object "
      "in a ```json fenced block, using exactly these keys:\n"
      "  n_atoms           integer, number of atoms\n"
      "  cell_volume       number, supercell volume V = a*b*c in cubic angstrom\n"
      "  a, b, c           numbers, supercell edge lengths in angstrom\n"
      "  mean_nn_distance  number, average nearest-neighbour distance in angstrom\n"
      "  density           number, bulk density in g/cm^3\n"
      "  a_p, b_p, c_p     numbers, primitive-cell edges in angstrom\n"
      "  alpha_p, beta_p, gamma_p  numbers, primitive-cell angles in degrees\n"
      "  space_group       string, Hermann-Mauguin symbol\n"
      "  description       string, short description of the structure\n"
      "Use plain numbers without units inside the JSON.";
  return s;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw GenerationError(fmt::format("prompt: missing corpus file '{}'", p.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Atom lines of an XYZ file: everything after the count and comment lines.
std::string atom_lines(const std::string& xyz, const fs::path& source) {
  const auto first = xyz.find('\n');
  const auto second = first == std::string::npos ? std::string::npos : xyz.find('\n', first + 1);
  if (second == std::string::npos) throw GenerationError(fmt::format("prompt: truncated XYZ '{}'", source.string()));
  return xyz.substr(second + 1);
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw GenerationError(fmt::format("prompt: missing corpus file '{}'", p.string()));
}

}  // namespace

Prompt build_prompt(const BenchmarkInstance& instance, const Dataset& dataset) {
  Prompt prompt;
  prompt.instance_id = instance.id;
  prompt.target = instance.target;
  const auto& root = dataset.root();

  prompt.parts.push_back({PromptPart::Kind::Text,
                          "You are given rendered crystal structures with their Material Properties records, "
                          "followed by a query structure given only as Cartesian coordinates.",
                          {}});
  std::size_t k = 0;
  for (const auto& ref : instance.context) {
    ++k;
    const auto image = png_path(root, ref);
    require_file(image);
    const auto ann = annotation_path(root, ref.material, ref.radius_nm);
    require_file(ann);
    prompt.parts.push_back({PromptPart::Kind::Text,
                            fmt::format("### Example {}: {}, R = {} nm, orientation {}", k, ref.material,
                                        radius_label(ref.radius_nm), ref.pose),
                            {}});
    prompt.parts.push_back({PromptPart::Kind::Image, {}, image});
    prompt.parts.push_back({PromptPart::Kind::Text, "Material Properties:\n" + read_file(ann), {}});
  }
  prompt.context_blocks = k;

  const auto xyz = xyz_path(root, instance.target);
  prompt.parts.push_back({PromptPart::Kind::Text,
                          "### Query\nAtomic coordinates (element x y z, angstrom):\n" + atom_lines(read_file(xyz), xyz),
                          {}});
  prompt.parts.push_back({PromptPart::Kind::Text, prompt_instruction(), {}});
  return prompt;
}

}  // namespace xtalbench
