#include "checkpoint.hpp"

#include <bit>
#include <cstring>

#include "error.hpp"
#include "json.hpp"
#include "text.hpp"

namespace credanno {

namespace {

using nlohmann::json;

static_assert(sizeof(double) == 8);

void append_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

json head_shape(const std::string& name, const LinearHead& h) {
  return json{{"name", name}, {"rows", h.classes()}, {"cols", h.inputs()}};
}

}  // namespace

const char* to_string(AttrFeed feed) {
  switch (feed) {
    case AttrFeed::Probabilities:
      return "probabilities";
    case AttrFeed::Logits:
      return "logits";
    case AttrFeed::OneHot:
      return "onehot";
  }
  return "probabilities";
}

AttrFeed parse_attr_feed(const std::string& s) {
  if (s == "probabilities") return AttrFeed::Probabilities;
  if (s == "logits") return AttrFeed::Logits;
  if (s == "onehot") return AttrFeed::OneHot;
  fail(ErrorKind::Config, "attr_feed must be probabilities, logits or onehot (got '" + s + "')");
}

void write_checkpoint(const std::filesystem::path& dir, const std::string& stem, const HierarchicalPredictor& pred) {
  std::string blob;
  blob.reserve(2 * 8 * pred.params().count());
  pred.params().visit([&](double v) { append_le(blob, v); });
  pred.st0().visit([&](double v) { append_le(blob, v); });

  json schema = json::array();
  for (const auto& a : pred.schema().attributes()) schema.push_back({{"name", a.name}, {"classes", a.class_count}});
  json heads = json::array();
  for (std::size_t i = 0; i < pred.schema().size(); ++i)
    heads.push_back(head_shape(pred.schema()[i].name, pred.params().attr[i]));
  heads.push_back(head_shape("malignancy", pred.params().cls));

  json manifest = {
      {"format", "credanno-checkpoint"},
      {"version", 1},
      {"dim", pred.dim()},
      {"schema", schema},
      {"schema_hash", text::hex64(pred.schema().hash())},
      {"rng_seed", pred.rng_seed()},
      {"attr_feed", to_string(pred.options().feed)},
      {"joint_backprop", pred.options().joint_backprop},
      {"heads", heads},
      {"tensor_file", stem + ".bin"},
      {"tensor_bytes", blob.size()},
      {"tensor_fnv1a64", text::hex64(text::fnv1a64(blob))},
  };
  text::write_file(dir / (stem + ".bin"), blob);
  text::write_file(dir / (stem + ".json"), manifest.dump(2) + "\n");
}

HierarchicalPredictor load_checkpoint(const std::filesystem::path& manifest_path) {
  json m;
  try {
    m = json::parse(text::read_file(manifest_path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, manifest_path.string() + ": " + e.what());
  }
  try {
    if (m.at("format") != "credanno-checkpoint" || m.at("version") != 1)
      fail(ErrorKind::Format, manifest_path.string() + ": not a version-1 checkpoint manifest");
    std::vector<Attribute> attrs;
    for (const auto& a : m.at("schema")) attrs.push_back({a.at("name").get<std::string>(), a.at("classes").get<int>()});
    AttributeSchema schema(std::move(attrs));
    if (text::hex64(schema.hash()) != m.at("schema_hash").get<std::string>())
      fail(ErrorKind::Format, manifest_path.string() + ": schema hash mismatch");
    const auto dim = m.at("dim").get<std::size_t>();
    PredictorOptions opts;
    opts.feed = parse_attr_feed(m.at("attr_feed").get<std::string>());
    opts.joint_backprop = m.at("joint_backprop").get<bool>();

    auto blob = text::read_file(manifest_path.parent_path() / m.at("tensor_file").get<std::string>());
    if (blob.size() != m.at("tensor_bytes").get<std::size_t>())
      fail(ErrorKind::Format, manifest_path.string() + ": tensor file size mismatch");
    if (text::hex64(text::fnv1a64(blob)) != m.at("tensor_fnv1a64").get<std::string>())
      fail(ErrorKind::Format, manifest_path.string() + ": tensor file checksum mismatch");

    Parameters live;
    for (const auto& a : schema.attributes()) live.attr.emplace_back(static_cast<std::size_t>(a.class_count), dim);
    live.cls = LinearHead(kMalignancyClasses, dim + static_cast<std::size_t>(schema.total_classes()));
    Parameters st0 = live;
    if (blob.size() != 2 * 8 * live.count())
      fail(ErrorKind::Format, manifest_path.string() + ": tensor file does not match declared shapes");
    std::size_t pos = 0;
    auto fill = [&](double& v) {
      v = read_le(blob.data() + pos);
      pos += 8;
    };
    live.for_each(fill);
    st0.for_each(fill);
    return HierarchicalPredictor(dim, std::move(schema), m.at("rng_seed").get<std::uint64_t>(), opts, std::move(live),
                                 std::move(st0));
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, manifest_path.string() + ": " + e.what());
  }
}

}  // namespace credanno
