#include <algorithm>
#include <random>
#include <set>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {
namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm";
}

std::optional<fs::path> find_gold(const fs::path& dir, const std::string& id) {
    for (const char* ext : {".png", ".pgm", ".PNG"}) {
        const auto p = dir / (id + ext);
        if (fs::exists(p)) return p;
    }
    return std::nullopt;
}

}  // namespace

Dataset Dataset::load(const fs::path& root) {
    const auto images = root / "images";
    const auto gold = root / "gold";
    if (!fs::is_directory(images)) throw IoError("dataset: missing directory " + images.string());
    if (!fs::is_directory(gold)) throw IoError("dataset: missing directory " + gold.string());

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(images))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());

    Dataset ds;
    ds.name = root.filename().string();
    if (ds.name.empty()) ds.name = root.parent_path().filename().string();
    for (const auto& f : files) {
        const auto id = f.stem().string();
        const auto g = find_gold(gold, id);
        if (!g) throw IoError("dataset: no gold mask for image '" + id + "'");
        ds.items.push_back({id, load_image(f), load_mask(*g)});
    }
    if (ds.items.empty()) throw IoError("dataset: no images under " + images.string());
    ds.validate();
    return ds;
}

void Dataset::save(const fs::path& root) const {
    fs::create_directories(root / "images");
    fs::create_directories(root / "gold");
    for (const auto& s : items) {
        save_image(s.image, root / "images" / (s.id + ".png"));
        save_mask(s.gold, root / "gold" / (s.id + ".png"));
    }
}

const Sample& Dataset::get(const std::string& id) const { return items[index_of(id)]; }

std::size_t Dataset::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].id == id) return i;
    throw ContractViolation("dataset: unknown image id '" + id + "'");
}

void Dataset::validate() const {
    require(!items.empty(), "dataset: no images");
    std::set<std::string> ids;
    for (const auto& s : items) {
        require(ids.insert(s.id).second, "dataset: duplicate image id '" + s.id + "'");
        require(s.gold.same_shape(s.image), "dataset: gold mask of '" + s.id + "' does not match the image size");
    }
    for (const auto& sp : splits) {
        std::set<std::string> train(sp.train.begin(), sp.train.end());
        for (const auto& t : sp.test) require(!train.count(t), "dataset: image '" + t + "' is in both train and test");
        for (const auto& t : sp.train) require(ids.count(t) > 0, "dataset: split references unknown id '" + t + "'");
        for (const auto& t : sp.test) require(ids.count(t) > 0, "dataset: split references unknown id '" + t + "'");
    }
}

void Dataset::make_splits(int runs, std::uint64_t seed, std::optional<int> train_count) {
    require(runs >= 1, "make_splits: runs must be >= 1");
    const int n = static_cast<int>(items.size());
    require(n >= 2, "make_splits: need at least two images");
    int n_train = 0;
    if (train_count)
        n_train = *train_count;
    else if (n == 35)
        n_train = 30;
    else
        n_train = static_cast<int>(std::lround(0.85 * n));
    n_train = std::clamp(n_train, 1, n - 1);

    std::mt19937_64 rng(seed);
    splits.clear();
    for (int r = 0; r < runs; ++r) {
        std::vector<std::string> ids;
        for (const auto& s : items) ids.push_back(s.id);
        // Fisher-Yates with explicit draws so the order is library independent.
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
            std::swap(ids[i], ids[j]);
        }
        Split sp;
        sp.train.assign(ids.begin(), ids.begin() + n_train);
        sp.test.assign(ids.begin() + n_train, ids.end());
        splits.push_back(std::move(sp));
    }
}

}  // namespace scefis
