// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#include "ditto/cli/commands.hpp"

int main(int argc, char** argv) { return ditto::cli::main(argc, argv); }
