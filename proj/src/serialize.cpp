// Copyright (c) 2026 The Graphcap Authors
// SPDX-License-Identifier: Apache-2.0
