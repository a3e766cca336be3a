#pragma once

#include <filesystem>

#include "data/dataset.hpp"

namespace lirec {

// On-disk dataset layout:
//
//   <root>/manifest.json        labels, spans, feature-file references
//   <root>/features/...         one LIRC container per feature tensor
//
// manifest.json schema (all indices zero-based):
// {
//   "schema_version": 1,
//   "vocabularies": {"interactions": [...], "relationships": [...]},
//   "movies": [{
//     "id": "m000",
//     "characters": ["anna", ...],
//     "clips": [{
//       "id": "m000_c00012",
//       "span": [start_seconds, end_seconds],
//       "interaction": 17,
//       "pair": {"actor": 2, "recipient": 4} | {"actor": 2, "recipient": null} | null,
//       "relationship": 3 | null,
//       "features": {
//         "visual": "features/m000/c00012_visual.lirc",
//         "dialog": "features/m000/c00012_dialog.lirc" | null,
//         "tracks": {"2": "features/m000/c00012_track2.lirc", ...}
//       }
//     }]
//   }]
// }

MovieDataset load_dataset(const std::filesystem::path& root);
void write_dataset(const MovieDataset& ds, const std::filesystem::path& root);

}  // namespace lirec
