// Copyright (c) 2026, T2J harness contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "t2j/codebleu/codebleu.hpp"
#include "t2j/corpus.hpp"
#include "t2j/error.hpp"
#include "t2j/experiments.hpp"
#include "t2j/judge.hpp"
#include "t2j/llm_client.hpp"
#include "t2j/mock_provider.hpp"
#include "t2j/prompt.hpp"
#include "t2j/providers.hpp"
#include "t2j/runner_client.hpp"
#include "t2j/stats.hpp"
