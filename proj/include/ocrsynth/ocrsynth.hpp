#pragma once

#include "ocrsynth/align.hpp"
#include "ocrsynth/common.hpp"
#include "ocrsynth/corpus.hpp"
#include "ocrsynth/cvmat.hpp"
#include "ocrsynth/degrade.hpp"
#include "ocrsynth/error_model.hpp"
#include "ocrsynth/features.hpp"
#include "ocrsynth/fonts.hpp"
#include "ocrsynth/inject.hpp"
#include "ocrsynth/manifest.hpp"
#include "ocrsynth/metrics.hpp"
#include "ocrsynth/ocr_engine.hpp"
#include "ocrsynth/parallel.hpp"
#include "ocrsynth/raster.hpp"
#include "ocrsynth/rng.hpp"
#include "ocrsynth/simmatrix.hpp"
#include "ocrsynth/simmatrix_build.hpp"
#include "ocrsynth/utf8.hpp"
