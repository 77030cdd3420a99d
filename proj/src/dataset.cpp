#include "recon/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "recon/zip.hpp"

namespace recon {

void DatasetArchive::validate() const {
    const std::size_t n = poses.size();
    if (n == 0) throw ValidationError("dataset: pose table is empty");
    if (manifest.frames != static_cast<int>(n))
        throw ValidationError("dataset: manifest frame count " +
                              std::to_string(manifest.frames) + " != table rows " +
                              std::to_string(n));
    if (images.size() != n)
        throw ValidationError("dataset: image count " + std::to_string(images.size()) +
                              " != table rows " + std::to_string(n));
    if (compensation.size() != n)
        throw ValidationError("dataset: compensation rows " +
                              std::to_string(compensation.size()) + " != table rows " +
                              std::to_string(n));
    if (manifest.preprocessed && masks.size() != n)
        throw ValidationError("dataset: preprocessed archive has " +
                              std::to_string(masks.size()) + " masks for " +
                              std::to_string(n) + " frames");
    if (!masks.empty() && masks.size() != n)
        throw ValidationError("dataset: mask count " + std::to_string(masks.size()) +
                              " != frame count " + std::to_string(n));

    const int w = static_cast<int>(manifest.width);
    const int h = static_cast<int>(manifest.height);
    for (std::size_t i = 0; i < images.size(); ++i)
        if (images[i].width != w || images[i].height != h)
            throw ValidationError("dataset: image " + frame_name(static_cast<int>(i)) +
                                  " is " + std::to_string(images[i].width) + "x" +
                                  std::to_string(images[i].height) +
                                  ", manifest says " + std::to_string(w) + "x" +
                                  std::to_string(h));
    for (std::size_t i = 0; i < masks.size(); ++i)
        if (masks[i].width != w || masks[i].height != h || masks[i].channels != 1)
            throw ValidationError("dataset: mask " + frame_name(static_cast<int>(i)) +
                                  " does not match the manifest geometry");
}

std::string frame_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return buf;
}

std::string manifest_to_text(const DatasetManifest& m) {
    std::ostringstream out;
    out << "frames=" << m.frames << "\n";
    char num[64];
    std::snprintf(num, sizeof(num), "%.17g", m.height);
    out << "height=" << num << "\n";
    std::snprintf(num, sizeof(num), "%.17g", m.width);
    out << "width=" << num << "\n";
    std::snprintf(num, sizeof(num), "%.17g", m.focal);
    out << "focal=" << num << "\n";
    out << "preprocessed=" << (m.preprocessed ? "true" : "false") << "\n";
    out << "created_unix=" << m.created_unix << "\n";
    out << "image_ext=" << m.image_ext << "\n";
    return out.str();
}

DatasetManifest manifest_from_text(const std::string& text) {
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("manifest: line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "frames") m.frames = std::stoi(val);
            else if (key == "height") m.height = std::stod(val);
            else if (key == "width") m.width = std::stod(val);
            else if (key == "focal") m.focal = std::stod(val);
            else if (key == "preprocessed") m.preprocessed = val == "true";
            else if (key == "created_unix") m.created_unix = std::stoll(val);
            else if (key == "image_ext") m.image_ext = val;
            // unknown keys are ignored for forward compatibility
        } catch (const std::logic_error&) {
            throw FormatError("manifest: bad value for " + key + ": " + val);
        }
    }
    if (m.frames <= 0) throw FormatError("manifest: missing or non-positive frame count");
    return m;
}

std::vector<std::uint8_t> pack_dataset(const DatasetArchive& archive) {
    archive.validate();
    std::vector<ZipEntry> entries;
    entries.reserve(3 + archive.images.size() + archive.masks.size());

    {
        const std::string text = manifest_to_text(archive.manifest);
        entries.push_back({"manifest.txt", {text.begin(), text.end()}});
    }
    {
        ZipEntry e{"poses_bounds.npy", {}};
        write_npy(archive.poses, e.data);
        entries.push_back(std::move(e));
    }
    {
        ZipEntry e{"compensation.npy", {}};
        write_npy(archive.compensation, e.data);
        entries.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < archive.images.size(); ++i)
        entries.push_back({"images/" + frame_name(static_cast<int>(i)) + "." +
                               archive.manifest.image_ext,
                           png_encode(archive.images[i])});
    for (std::size_t i = 0; i < archive.masks.size(); ++i)
        entries.push_back({"masks/" + frame_name(static_cast<int>(i)) + "." +
                               archive.manifest.image_ext,
                           png_encode(archive.masks[i])});
    return zip_pack(entries);
}

DatasetArchive unpack_dataset(const std::vector<std::uint8_t>& bytes) {
    const std::vector<ZipEntry> entries = zip_unpack(bytes);

    const ZipEntry* manifest_entry = nullptr;
    const ZipEntry* poses_entry = nullptr;
    const ZipEntry* comp_entry = nullptr;
    std::map<std::string, const ZipEntry*> images, masks;

    for (const ZipEntry& e : entries) {
        if (e.name == "manifest.txt") manifest_entry = &e;
        else if (e.name == "poses_bounds.npy") poses_entry = &e;
        else if (e.name == "compensation.npy") comp_entry = &e;
        else if (e.name.starts_with("images/")) images[e.name] = &e;
        else if (e.name.starts_with("masks/")) masks[e.name] = &e;
    }

    std::string missing;
    if (!manifest_entry) missing += " manifest.txt";
    if (!poses_entry) missing += " poses_bounds.npy";
    if (!comp_entry) missing += " compensation.npy";
    if (!missing.empty())
        throw ValidationError("dataset: archive is missing members:" + missing);

    DatasetArchive a;
    a.manifest = manifest_from_text(
        std::string(manifest_entry->data.begin(), manifest_entry->data.end()));
    a.poses = read_npy(poses_entry->data);
    a.compensation = read_npy(comp_entry->data);

    auto collect = [&](const std::map<std::string, const ZipEntry*>& src,
                       const std::string& dir) {
        std::vector<Image> out;
        out.reserve(src.size());
        int expect = 0;
        std::string missing_frames;
        for (const auto& [name, entry] : src) {
            const std::string want =
                dir + "/" + frame_name(expect) + "." + a.manifest.image_ext;
            if (name != want) missing_frames += " " + want;
            out.push_back(png_decode(entry->data));
            ++expect;
        }
        if (!missing_frames.empty())
            throw ValidationError("dataset: unexpected frame naming, wanted:" +
                                  missing_frames);
        return out;
    };
    a.images = collect(images, "images");
    a.masks = collect(masks, "masks");

    a.validate();
    return a;
}

} // namespace recon
