/*
 * Copyright 2026 The granule-dds Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "granule/catalog/catalog.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "granule/core/state_machine.hpp"
#include "granule/errors.hpp"

namespace granule {

namespace {

using json = nlohmann::json;

[[noreturn]] void throw_sqlite(sqlite3* db, const std::string& op) {
  throw Error(ErrorCode::StorageError, op + ": " + (db ? sqlite3_errmsg(db) : "no handle"));
}

/// RAII prepared statement with positional bind helpers.
class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      throw_sqlite(db, "prepare '" + sql + "'");
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }

  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int pos, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, pos, v));
    return *this;
  }
  Stmt& bind(int pos, double v) {
    check(sqlite3_bind_double(stmt_, pos, v));
    return *this;
  }
  Stmt& bind(int pos, const std::string& v) {
    check(sqlite3_bind_text(stmt_, pos, v.c_str(), -1, SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind_null(int pos) {
    check(sqlite3_bind_null(stmt_, pos));
    return *this;
  }

  /// Steps once; true when a row is available.
  bool row() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw_sqlite(db_, "step");
  }
  void exec() {
    if (row()) throw Error(ErrorCode::StorageError, "unexpected row from non-query statement");
  }

  std::int64_t col_int(int i) const { return sqlite3_column_int64(stmt_, i); }
  double col_double(int i) const { return sqlite3_column_double(stmt_, i); }
  std::string col_text(int i) const {
    const unsigned char* t = sqlite3_column_text(stmt_, i);
    return t ? reinterpret_cast<const char*>(t) : "";
  }
  bool col_null(int i) const { return sqlite3_column_type(stmt_, i) == SQLITE_NULL; }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw_sqlite(db_, "bind");
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

constexpr char kSchema[] = R"sql(
CREATE TABLE IF NOT EXISTS meta(
  key TEXT PRIMARY KEY,
  value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS requests(
  request_id INTEGER PRIMARY KEY AUTOINCREMENT,
  scope TEXT NOT NULL,
  name TEXT NOT NULL,
  request_type TEXT NOT NULL,
  transform_tag TEXT NOT NULL,
  granularity TEXT NOT NULL,
  chunk_size INTEGER NOT NULL,
  priority INTEGER NOT NULL,
  status TEXT NOT NULL,
  created_at REAL NOT NULL,
  updated_at REAL NOT NULL,
  lifetime_seconds INTEGER NOT NULL,
  metadata TEXT NOT NULL,
  version INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS collections(
  collection_id INTEGER PRIMARY KEY AUTOINCREMENT,
  request_id INTEGER NOT NULL,
  relation TEXT NOT NULL,
  scope TEXT NOT NULL,
  name TEXT NOT NULL,
  total_contents INTEGER NOT NULL,
  available_contents INTEGER NOT NULL,
  delivered_contents INTEGER NOT NULL,
  status TEXT NOT NULL,
  version INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS idx_collections_request ON collections(request_id);
CREATE TABLE IF NOT EXISTS contents(
  content_id INTEGER PRIMARY KEY AUTOINCREMENT,
  collection_id INTEGER NOT NULL,
  scope TEXT NOT NULL,
  name TEXT NOT NULL,
  min_id INTEGER NOT NULL,
  max_id INTEGER NOT NULL,
  status TEXT NOT NULL,
  size_bytes INTEGER NOT NULL,
  checksum TEXT NOT NULL,
  locator TEXT NOT NULL,
  parent_content_id INTEGER,
  attempts INTEGER NOT NULL DEFAULT 0,
  content_key TEXT NOT NULL,
  version INTEGER NOT NULL,
  UNIQUE(collection_id, content_key));
CREATE INDEX IF NOT EXISTS idx_contents_collection ON contents(collection_id, status);
CREATE TABLE IF NOT EXISTS transforms(
  transform_id INTEGER PRIMARY KEY AUTOINCREMENT,
  request_id INTEGER NOT NULL,
  transform_tag TEXT NOT NULL,
  status TEXT NOT NULL,
  retries INTEGER NOT NULL,
  max_retries INTEGER NOT NULL,
  version INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS messages(
  msg_id INTEGER PRIMARY KEY AUTOINCREMENT,
  request_id INTEGER NOT NULL,
  msg_type TEXT NOT NULL,
  content_ids TEXT NOT NULL,
  dedup_key TEXT NOT NULL UNIQUE,
  status TEXT NOT NULL,
  created_at REAL NOT NULL);
CREATE TABLE IF NOT EXISTS claims(
  item_kind TEXT NOT NULL,
  item_id INTEGER NOT NULL,
  agent_id TEXT NOT NULL,
  claimed_at REAL NOT NULL,
  lease_seconds INTEGER NOT NULL,
  PRIMARY KEY(item_kind, item_id));
CREATE TABLE IF NOT EXISTS heartbeats(
  agent_kind TEXT PRIMARY KEY,
  agent_id TEXT NOT NULL,
  last_beat REAL NOT NULL);
)sql";

std::string join_ids(const std::vector<std::int64_t>& ids) {
  json j = ids;
  return j.dump();
}

std::vector<std::int64_t> parse_ids(const std::string& text) {
  json j = json::parse(text);
  return j.get<std::vector<std::int64_t>>();
}

std::string placeholders(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? ",?" : "?");
  return out;
}

}  // namespace

std::string to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::Request: return "request";
    case ItemKind::Collection: return "collection";
    case ItemKind::Content: return "content";
    case ItemKind::Transform: return "transform";
    case ItemKind::Message: return "message";
    case ItemKind::MessageBatch: return "message_batch";
  }
  return "request";
}

class Catalog::Impl {
 public:
  explicit Impl(const CatalogConfig& config) : config_(config) {
    int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(config.storage_path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "open failed";
      sqlite3_close(db_);
      throw Error(ErrorCode::StorageError, "open '" + config.storage_path + "': " + msg);
    }
    exec_raw("PRAGMA busy_timeout=10000;");
    if (config.storage_path != ":memory:") {
      exec_raw("PRAGMA journal_mode=WAL;");
      exec_raw("PRAGMA synchronous=NORMAL;");
    }
    exec_raw(kSchema);
    Stmt(db_, "INSERT OR IGNORE INTO meta(key,value) VALUES('schema_version','1')").exec();
  }

  ~Impl() { close(); }

  void close() {
    std::lock_guard lock(mu_);
    if (db_) {
      sqlite3_close(db_);
      db_ = nullptr;
    }
  }

  bool ping() const {
    std::lock_guard lock(mu_);
    if (!db_) return false;
    try {
      Stmt s(db_, "SELECT 1");
      return s.row();
    } catch (const Error&) {
      return false;
    }
  }

  // Runs `fn` inside one immediate transaction, rolling back on any throw.
  template <typename Fn>
  auto transact(Fn&& fn) {
    std::lock_guard lock(mu_);
    require_open();
    exec_raw("BEGIN IMMEDIATE;");
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        exec_raw("COMMIT;");
      } else {
        auto result = fn();
        exec_raw("COMMIT;");
        return result;
      }
    } catch (...) {
      try {
        exec_raw("ROLLBACK;");
      } catch (...) {
      }
      throw;
    }
  }

  template <typename Fn>
  auto read(Fn&& fn) const {
    std::lock_guard lock(mu_);
    require_open();
    return fn();
  }

  // -- row mapping ----------------------------------------------------------

  Request read_request_row(Stmt& s) const {
    Request r;
    r.request_id = s.col_int(0);
    r.scope = s.col_text(1);
    r.name = s.col_text(2);
    r.request_type = request_type_from_string(s.col_text(3));
    r.transform_tag = s.col_text(4);
    r.granularity = granularity_from_string(s.col_text(5));
    r.chunk_size = s.col_int(6);
    r.priority = s.col_int(7);
    r.status = request_status_from_string(s.col_text(8));
    r.created_at = s.col_double(9);
    r.updated_at = s.col_double(10);
    r.lifetime_seconds = s.col_int(11);
    r.metadata = json::parse(s.col_text(12)).get<std::map<std::string, std::string>>();
    r.version = s.col_int(13);
    return r;
  }

  Collection read_collection_row(Stmt& s) const {
    Collection c;
    c.collection_id = s.col_int(0);
    c.request_id = s.col_int(1);
    c.relation = collection_relation_from_string(s.col_text(2));
    c.scope = s.col_text(3);
    c.name = s.col_text(4);
    c.total_contents = s.col_int(5);
    c.available_contents = s.col_int(6);
    c.delivered_contents = s.col_int(7);
    c.status = collection_status_from_string(s.col_text(8));
    c.version = s.col_int(9);
    return c;
  }

  Content read_content_row(Stmt& s) const {
    Content c;
    c.content_id = s.col_int(0);
    c.collection_id = s.col_int(1);
    c.scope = s.col_text(2);
    c.name = s.col_text(3);
    c.min_id = s.col_int(4);
    c.max_id = s.col_int(5);
    c.status = content_status_from_string(s.col_text(6));
    c.size_bytes = s.col_int(7);
    c.checksum = s.col_text(8);
    c.locator = s.col_text(9);
    if (!s.col_null(10)) c.parent_content_id = s.col_int(10);
    c.version = s.col_int(11);
    return c;
  }

  Transform read_transform_row(Stmt& s) const {
    Transform t;
    t.transform_id = s.col_int(0);
    t.request_id = s.col_int(1);
    t.transform_tag = s.col_text(2);
    t.status = transform_status_from_string(s.col_text(3));
    t.retries = s.col_int(4);
    t.max_retries = s.col_int(5);
    t.version = s.col_int(6);
    return t;
  }

  Message read_message_row(Stmt& s) const {
    Message m;
    m.msg_id = s.col_int(0);
    m.request_id = s.col_int(1);
    m.msg_type = message_type_from_string(s.col_text(2));
    m.content_ids = parse_ids(s.col_text(3));
    m.dedup_key = s.col_text(4);
    m.status = message_status_from_string(s.col_text(5));
    m.created_at = s.col_double(6);
    return m;
  }

  static constexpr char kRequestCols[] =
      "request_id,scope,name,request_type,transform_tag,granularity,chunk_size,priority,status,"
      "created_at,updated_at,lifetime_seconds,metadata,version";
  static constexpr char kCollectionCols[] =
      "collection_id,request_id,relation,scope,name,total_contents,available_contents,"
      "delivered_contents,status,version";
  static constexpr char kContentCols[] =
      "content_id,collection_id,scope,name,min_id,max_id,status,size_bytes,checksum,locator,"
      "parent_content_id,version";
  static constexpr char kMessageCols[] =
      "msg_id,request_id,msg_type,content_ids,dedup_key,status,created_at";

  Request fetch_request(std::int64_t id) const {
    Stmt s(db_, std::string("SELECT ") + kRequestCols + " FROM requests WHERE request_id=?");
    s.bind(1, id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "request " + std::to_string(id));
    return read_request_row(s);
  }

  Collection fetch_collection(std::int64_t id) const {
    Stmt s(db_,
           std::string("SELECT ") + kCollectionCols + " FROM collections WHERE collection_id=?");
    s.bind(1, id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "collection " + std::to_string(id));
    return read_collection_row(s);
  }

  Content fetch_content(std::int64_t id) const {
    Stmt s(db_, std::string("SELECT ") + kContentCols + " FROM contents WHERE content_id=?");
    s.bind(1, id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "content " + std::to_string(id));
    return read_content_row(s);
  }

  Transform fetch_transform(std::int64_t id) const {
    Stmt s(db_, "SELECT transform_id,request_id,transform_tag,status,retries,max_retries,version"
                " FROM transforms WHERE transform_id=?");
    s.bind(1, id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "transform " + std::to_string(id));
    return read_transform_row(s);
  }

  Message fetch_message(std::int64_t id) const {
    Stmt s(db_, std::string("SELECT ") + kMessageCols + " FROM messages WHERE msg_id=?");
    s.bind(1, id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "message " + std::to_string(id));
    return read_message_row(s);
  }

  // -- transactional helpers (caller holds the transaction) ------------------

  void refresh_collection_counters(std::int64_t collection_id) {
    std::vector<ContentStatus> statuses;
    {
      Stmt s(db_, "SELECT status FROM contents WHERE collection_id=?");
      s.bind(1, collection_id);
      while (s.row()) statuses.push_back(content_status_from_string(s.col_text(0)));
    }
    CollectionCounters counters = derive_collection_counters(statuses);
    Stmt u(db_, "UPDATE collections SET total_contents=?, available_contents=?,"
                " delivered_contents=?, version=version+1 WHERE collection_id=?");
    u.bind(1, counters.total).bind(2, counters.available).bind(3, counters.delivered);
    u.bind(4, collection_id);
    u.exec();
  }

  void log_transition(ItemKind kind, std::int64_t id, const std::string& from,
                      const std::string& to, Timestamp at) {
    if (config_.record_transitions) transitions_.push_back({kind, id, from, to, at});
  }

  /// Validates and applies one content status step; bumps version and
  /// refreshes counters.
  void apply_content_status(const Content& current, ContentStatus to, Timestamp now) {
    if (!content_transition_allowed(current.status, to)) {
      throw Error(ErrorCode::IllegalTransition, "content " + std::to_string(current.content_id) +
                                                    ": " + to_string(current.status) + " -> " +
                                                    to_string(to));
    }
    Stmt u(db_, "UPDATE contents SET status=?, version=version+1 WHERE content_id=? AND version=?");
    u.bind(1, to_string(to)).bind(2, current.content_id).bind(3, current.version);
    u.exec();
    if (sqlite3_changes(db_) != 1) {
      throw Error(ErrorCode::VersionConflict,
                  "content " + std::to_string(current.content_id) + " version moved");
    }
    log_transition(ItemKind::Content, current.content_id, to_string(current.status), to_string(to),
                   now);
    refresh_collection_counters(current.collection_id);
  }

  void exec_raw(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "exec failed";
      sqlite3_free(err);
      throw Error(ErrorCode::StorageError, msg);
    }
  }

  void require_open() const {
    if (!db_) throw Error(ErrorCode::StorageError, "store is closed");
  }

  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
  CatalogConfig config_;
  std::vector<TransitionRecord> transitions_;
};

Catalog::Catalog(CatalogConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_)) {}

Catalog::~Catalog() = default;

void Catalog::close() { impl_->close(); }

bool Catalog::ping() const { return impl_->ping(); }

Catalog::InsertResult Catalog::insert_request(const Request& request, Timestamp now) {
  if (request.status != RequestStatus::New || request.version != 0) {
    throw Error(ErrorCode::InvalidArgument, "insert_request requires status=new, version=0");
  }
  if (request.scope.empty() || request.name.empty()) {
    throw Error(ErrorCode::InvalidArgument, "scope and name must be non-empty");
  }
  if (request.granularity == Granularity::EventRange && request.chunk_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "event_range granularity requires chunk_size >= 1");
  }
  return impl_->transact([&]() -> InsertResult {
    {
      Stmt s(impl_->db_,
             "SELECT request_id FROM requests WHERE scope=? AND name=? AND transform_tag=?"
             " AND request_type=? AND status IN ('new','in_progress') LIMIT 1");
      s.bind(1, request.scope).bind(2, request.name).bind(3, request.transform_tag);
      s.bind(4, to_string(request.request_type));
      if (s.row()) return {s.col_int(0), false};
    }
    Stmt ins(impl_->db_,
             "INSERT INTO requests(scope,name,request_type,transform_tag,granularity,chunk_size,"
             "priority,status,created_at,updated_at,lifetime_seconds,metadata,version)"
             " VALUES(?,?,?,?,?,?,?,?,?,?,?,?,0)");
    ins.bind(1, request.scope).bind(2, request.name).bind(3, to_string(request.request_type));
    ins.bind(4, request.transform_tag).bind(5, to_string(request.granularity));
    ins.bind(6, request.chunk_size).bind(7, request.priority).bind(8, to_string(RequestStatus::New));
    ins.bind(9, now).bind(10, now).bind(11, request.lifetime_seconds);
    ins.bind(12, json(request.metadata).dump());
    ins.exec();
    std::int64_t request_id = sqlite3_last_insert_rowid(impl_->db_);

    auto insert_collection = [&](CollectionRelation relation, const std::string& name) {
      Stmt c(impl_->db_,
             "INSERT INTO collections(request_id,relation,scope,name,total_contents,"
             "available_contents,delivered_contents,status,version) VALUES(?,?,?,?,0,0,0,'open',0)");
      c.bind(1, request_id).bind(2, to_string(relation)).bind(3, request.scope).bind(4, name);
      c.exec();
    };
    insert_collection(CollectionRelation::Input, request.name);
    insert_collection(CollectionRelation::Output, request.name + ".out");

    Stmt t(impl_->db_,
           "INSERT INTO transforms(request_id,transform_tag,status,retries,max_retries,version)"
           " VALUES(?,?,'new',0,?,0)");
    t.bind(1, request_id).bind(2, request.transform_tag).bind(3, std::int64_t{3});
    t.exec();
    return {request_id, true};
  });
}

Request Catalog::get_request(std::int64_t request_id) const {
  return impl_->read([&] { return impl_->fetch_request(request_id); });
}

std::vector<Collection> Catalog::collections_of(std::int64_t request_id) const {
  return impl_->read([&] {
    std::vector<Collection> out;
    Stmt s(impl_->db_, std::string("SELECT ") + Impl::kCollectionCols +
                           " FROM collections WHERE request_id=? ORDER BY collection_id");
    s.bind(1, request_id);
    while (s.row()) out.push_back(impl_->read_collection_row(s));
    return out;
  });
}

Collection Catalog::get_collection(std::int64_t collection_id) const {
  return impl_->read([&] { return impl_->fetch_collection(collection_id); });
}

Transform Catalog::get_transform(std::int64_t transform_id) const {
  return impl_->read([&] { return impl_->fetch_transform(transform_id); });
}

Transform Catalog::get_transform_of_request(std::int64_t request_id) const {
  return impl_->read([&] {
    Stmt s(impl_->db_, "SELECT transform_id,request_id,transform_tag,status,retries,max_retries,"
                       "version FROM transforms WHERE request_id=? ORDER BY transform_id LIMIT 1");
    s.bind(1, request_id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "transform of request " + std::to_string(request_id));
    return impl_->read_transform_row(s);
  });
}

std::vector<std::int64_t> Catalog::claim_work(ItemKind kind,
                                              const std::vector<std::string>& eligible_statuses,
                                              std::int64_t limit, const std::string& agent_id,
                                              std::int64_t lease_seconds, Timestamp now) {
  if (limit < 1) throw Error(ErrorCode::InvalidArgument, "claim limit must be >= 1");
  if (eligible_statuses.empty()) {
    throw Error(ErrorCode::InvalidArgument, "claim_work needs at least one eligible status");
  }
  std::string table;
  std::string id_col;
  switch (kind) {
    case ItemKind::Request:
    case ItemKind::MessageBatch:
      table = "requests";
      id_col = "request_id";
      for (const auto& s : eligible_statuses) request_status_from_string(s);
      break;
    case ItemKind::Transform:
      table = "transforms";
      id_col = "transform_id";
      for (const auto& s : eligible_statuses) transform_status_from_string(s);
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "item kind '" + to_string(kind) + "' is not claimable");
  }
  return impl_->transact([&] {
    std::vector<std::int64_t> claimed;
    std::string sql = "SELECT t." + id_col + " FROM " + table +
                      " t LEFT JOIN claims c ON c.item_kind=? AND c.item_id=t." + id_col +
                      " WHERE t.status IN (" + placeholders(eligible_statuses.size()) + ")" +
                      " AND (c.item_id IS NULL OR c.agent_id=? OR c.claimed_at+c.lease_seconds<=?)"
                      " ORDER BY t." +
                      id_col + " ASC LIMIT ?";
    Stmt s(impl_->db_, sql);
    int pos = 1;
    s.bind(pos++, to_string(kind));
    for (const auto& st : eligible_statuses) s.bind(pos++, st);
    s.bind(pos++, agent_id);
    s.bind(pos++, now);
    s.bind(pos++, limit);
    while (s.row()) claimed.push_back(s.col_int(0));
    for (std::int64_t id : claimed) {
      Stmt c(impl_->db_, "INSERT OR REPLACE INTO claims(item_kind,item_id,agent_id,claimed_at,"
                         "lease_seconds) VALUES(?,?,?,?,?)");
      c.bind(1, to_string(kind)).bind(2, id).bind(3, agent_id).bind(4, now).bind(5, lease_seconds);
      c.exec();
    }
    return claimed;
  });
}

std::int64_t Catalog::update_with_version(ItemKind kind, std::int64_t item_id,
                                          std::int64_t expected_version,
                                          const FieldChanges& changes, Timestamp now) {
  if (changes.empty()) throw Error(ErrorCode::InvalidArgument, "no changes given");
  return impl_->transact([&]() -> std::int64_t {
    switch (kind) {
      case ItemKind::Request: {
        Request cur = impl_->fetch_request(item_id);
        if (cur.version != expected_version) {
          throw Error(ErrorCode::VersionConflict, "request " + std::to_string(item_id));
        }
        std::string status = to_string(cur.status);
        std::string metadata = json(cur.metadata).dump();
        std::int64_t priority = cur.priority;
        for (const auto& [field, value] : changes) {
          if (field == "status") {
            status = std::get<std::string>(value);
            RequestStatus to = request_status_from_string(status);
            if (!request_transition_allowed(cur.status, to)) {
              throw Error(ErrorCode::IllegalTransition,
                          "request " + to_string(cur.status) + " -> " + status);
            }
          } else if (field == "metadata") {
            metadata = std::get<std::string>(value);
            json::parse(metadata);  // must be valid JSON
          } else if (field == "priority") {
            priority = std::get<std::int64_t>(value);
          } else {
            throw Error(ErrorCode::InvalidArgument, "request field '" + field + "' is not updatable");
          }
        }
        Stmt u(impl_->db_, "UPDATE requests SET status=?, metadata=?, priority=?, updated_at=?,"
                           " version=version+1 WHERE request_id=?");
        u.bind(1, status).bind(2, metadata).bind(3, priority).bind(4, now).bind(5, item_id);
        u.exec();
        if (changes.count("status")) {
          impl_->log_transition(ItemKind::Request, item_id, to_string(cur.status), status, now);
        }
        return cur.version + 1;
      }
      case ItemKind::Collection: {
        Collection cur = impl_->fetch_collection(item_id);
        if (cur.version != expected_version) {
          throw Error(ErrorCode::VersionConflict, "collection " + std::to_string(item_id));
        }
        for (const auto& [field, value] : changes) {
          if (field != "status") {
            throw Error(ErrorCode::InvalidArgument,
                        "collection field '" + field + "' is not updatable");
          }
          CollectionStatus to = collection_status_from_string(std::get<std::string>(value));
          if (!(cur.status == CollectionStatus::Open && to == CollectionStatus::Closed)) {
            throw Error(ErrorCode::IllegalTransition,
                        "collection " + to_string(cur.status) + " -> " + to_string(to));
          }
          Stmt u(impl_->db_, "UPDATE collections SET status=?, version=version+1"
                             " WHERE collection_id=?");
          u.bind(1, to_string(to)).bind(2, item_id);
          u.exec();
          impl_->log_transition(ItemKind::Collection, item_id, to_string(cur.status), to_string(to),
                                now);
        }
        return cur.version + 1;
      }
      case ItemKind::Content: {
        Content cur = impl_->fetch_content(item_id);
        if (cur.version != expected_version) {
          throw Error(ErrorCode::VersionConflict, "content " + std::to_string(item_id));
        }
        for (const auto& [field, value] : changes) {
          if (field == "status") {
            ContentStatus to = content_status_from_string(std::get<std::string>(value));
            impl_->apply_content_status(cur, to, now);
          } else if (field == "checksum" || field == "locator") {
            Stmt u(impl_->db_, "UPDATE contents SET " + field +
                                   "=?, version=version+1 WHERE content_id=?");
            u.bind(1, std::get<std::string>(value)).bind(2, item_id);
            u.exec();
          } else if (field == "size_bytes") {
            Stmt u(impl_->db_, "UPDATE contents SET size_bytes=?, version=version+1"
                               " WHERE content_id=?");
            u.bind(1, std::get<std::int64_t>(value)).bind(2, item_id);
            u.exec();
          } else {
            throw Error(ErrorCode::InvalidArgument, "content field '" + field + "' is not updatable");
          }
          cur = impl_->fetch_content(item_id);  // next field stacks on the bumped version
        }
        return cur.version;
      }
      case ItemKind::Transform: {
        Transform cur = impl_->fetch_transform(item_id);
        if (cur.version != expected_version) {
          throw Error(ErrorCode::VersionConflict, "transform " + std::to_string(item_id));
        }
        std::string status = to_string(cur.status);
        std::int64_t retries = cur.retries;
        for (const auto& [field, value] : changes) {
          if (field == "status") {
            status = std::get<std::string>(value);
            TransformStatus to = transform_status_from_string(status);
            bool ok = (cur.status == TransformStatus::New &&
                       (to == TransformStatus::Running || to == TransformStatus::Failed)) ||
                      (cur.status == TransformStatus::Running &&
                       (to == TransformStatus::Finished || to == TransformStatus::Failed));
            if (!ok) {
              throw Error(ErrorCode::IllegalTransition,
                          "transform " + to_string(cur.status) + " -> " + status);
            }
          } else if (field == "retries") {
            retries = std::get<std::int64_t>(value);
            if (retries > cur.max_retries) {
              throw Error(ErrorCode::InvalidArgument, "retries above max_retries");
            }
          } else {
            throw Error(ErrorCode::InvalidArgument,
                        "transform field '" + field + "' is not updatable");
          }
        }
        if (status == to_string(TransformStatus::Failed) && retries != cur.max_retries) {
          throw Error(ErrorCode::InvalidArgument, "transform may fail only with retries=max_retries");
        }
        Stmt u(impl_->db_, "UPDATE transforms SET status=?, retries=?, version=version+1"
                           " WHERE transform_id=?");
        u.bind(1, status).bind(2, retries).bind(3, item_id);
        u.exec();
        if (changes.count("status")) {
          impl_->log_transition(ItemKind::Transform, item_id, to_string(cur.status), status, now);
        }
        return cur.version + 1;
      }
      default:
        throw Error(ErrorCode::InvalidArgument,
                    "item kind '" + to_string(kind) + "' has no versioned updates");
    }
  });
}

std::pair<std::int64_t, std::int64_t> Catalog::bulk_upsert_contents(std::int64_t collection_id,
                                                                    std::vector<Content>& contents,
                                                                    Timestamp now) {
  return impl_->transact([&]() -> std::pair<std::int64_t, std::int64_t> {
    Collection coll = impl_->fetch_collection(collection_id);
    if (coll.status != CollectionStatus::Open) {
      throw Error(ErrorCode::CollectionClosed,
                  "collection " + std::to_string(collection_id) + " is closed");
    }
    std::int64_t inserted = 0, duplicates = 0;
    for (Content& c : contents) {
      std::string key = canonical_content_key(c.scope, c.name, c.min_id, c.max_id);
      Stmt ins(impl_->db_,
               "INSERT OR IGNORE INTO contents(collection_id,scope,name,min_id,max_id,status,"
               "size_bytes,checksum,locator,parent_content_id,content_key,version)"
               " VALUES(?,?,?,?,?,?,?,?,?,?,?,0)");
      ins.bind(1, collection_id).bind(2, c.scope).bind(3, c.name).bind(4, c.min_id);
      ins.bind(5, c.max_id).bind(6, to_string(c.status)).bind(7, c.size_bytes).bind(8, c.checksum);
      ins.bind(9, c.locator);
      if (c.parent_content_id) {
        ins.bind(10, *c.parent_content_id);
      } else {
        ins.bind_null(10);
      }
      ins.bind(11, key);
      ins.exec();
      if (sqlite3_changes(impl_->db_) == 1) {
        c.content_id = sqlite3_last_insert_rowid(impl_->db_);
        c.collection_id = collection_id;
        inserted++;
        impl_->log_transition(ItemKind::Content, c.content_id, "", to_string(c.status), now);
      } else {
        Stmt find(impl_->db_,
                  "SELECT content_id FROM contents WHERE collection_id=? AND content_key=?");
        find.bind(1, collection_id).bind(2, key);
        find.row();
        c.content_id = find.col_int(0);
        c.collection_id = collection_id;
        duplicates++;
      }
    }
    impl_->refresh_collection_counters(collection_id);
    return {inserted, duplicates};
  });
}

ContentPage Catalog::query_contents(const ContentFilter& filter) const {
  if (!filter.request_id && !filter.collection_id && !filter.statuses) {
    throw Error(ErrorCode::InvalidFilter, "need request_id, collection_id or a status set");
  }
  return impl_->read([&] {
    std::int64_t page_size = filter.page_size > 0
                                 ? std::min(filter.page_size, config_.page_size_max)
                                 : config_.page_size_max;
    std::int64_t after = 0;
    if (!filter.page_token.empty()) {
      try {
        after = std::stoll(filter.page_token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad page token '" + filter.page_token + "'");
      }
    }
    std::string sql = std::string("SELECT ") + Impl::kContentCols + " FROM contents WHERE content_id>?";
    if (filter.collection_id) sql += " AND collection_id=?";
    if (filter.request_id) {
      sql += " AND collection_id IN (SELECT collection_id FROM collections WHERE request_id=?)";
    }
    if (filter.statuses) {
      sql += " AND status IN (" + placeholders(filter.statuses->size()) + ")";
    }
    sql += " ORDER BY content_id ASC LIMIT ?";
    Stmt s(impl_->db_, sql);
    int pos = 1;
    s.bind(pos++, after);
    if (filter.collection_id) s.bind(pos++, *filter.collection_id);
    if (filter.request_id) s.bind(pos++, *filter.request_id);
    if (filter.statuses) {
      for (ContentStatus st : *filter.statuses) s.bind(pos++, to_string(st));
    }
    s.bind(pos++, page_size + 1);
    ContentPage page;
    while (s.row()) page.items.push_back(impl_->read_content_row(s));
    if (std::cmp_greater(page.items.size(), page_size)) {
      page.items.pop_back();
      page.next_page_token = std::to_string(page.items.back().content_id);
    }
    return page;
  });
}

Content Catalog::get_content(std::int64_t content_id) const {
  return impl_->read([&] { return impl_->fetch_content(content_id); });
}

std::vector<Content> Catalog::contents_of_collection(std::int64_t collection_id) const {
  ContentFilter filter;
  filter.collection_id = collection_id;
  return contents_filtered(std::move(filter));
}

std::vector<Content> Catalog::contents_filtered(ContentFilter filter) const {
  std::vector<Content> all;
  filter.page_token.clear();
  while (true) {
    ContentPage page = query_contents(filter);
    all.insert(all.end(), page.items.begin(), page.items.end());
    if (page.next_page_token.empty()) break;
    filter.page_token = page.next_page_token;
  }
  return all;
}

std::set<std::int64_t> Catalog::consumed_parent_ids(std::int64_t collection_id) const {
  return impl_->read([&] {
    std::set<std::int64_t> out;
    Stmt s(impl_->db_, "SELECT DISTINCT parent_content_id FROM contents"
                       " WHERE collection_id=? AND parent_content_id IS NOT NULL");
    s.bind(1, collection_id);
    while (s.row()) out.insert(s.col_int(0));
    return out;
  });
}

std::int64_t Catalog::increment_content_attempts(std::int64_t content_id) {
  return impl_->transact([&]() -> std::int64_t {
    impl_->fetch_content(content_id);
    Stmt u(impl_->db_, "UPDATE contents SET attempts=attempts+1 WHERE content_id=?");
    u.bind(1, content_id);
    u.exec();
    Stmt s(impl_->db_, "SELECT attempts FROM contents WHERE content_id=?");
    s.bind(1, content_id);
    s.row();
    return s.col_int(0);
  });
}

std::int64_t Catalog::content_attempts(std::int64_t content_id) const {
  return impl_->read([&]() -> std::int64_t {
    Stmt s(impl_->db_, "SELECT attempts FROM contents WHERE content_id=?");
    s.bind(1, content_id);
    if (!s.row()) throw Error(ErrorCode::NotFound, "content " + std::to_string(content_id));
    return s.col_int(0);
  });
}

std::int64_t Catalog::record_message(const Message& message, Timestamp now) {
  if (message.status != MessageStatus::New) {
    throw Error(ErrorCode::InvalidArgument, "record_message requires status=new");
  }
  if (message.msg_type == MessageType::ContentAvailable && message.content_ids.empty()) {
    throw Error(ErrorCode::InvalidArgument, "content_available message needs content ids");
  }
  return impl_->transact([&]() -> std::int64_t {
    Stmt find(impl_->db_, "SELECT msg_id FROM messages WHERE dedup_key=?");
    find.bind(1, message.dedup_key);
    if (find.row()) return find.col_int(0);
    Stmt ins(impl_->db_, "INSERT INTO messages(request_id,msg_type,content_ids,dedup_key,status,"
                         "created_at) VALUES(?,?,?,?,'new',?)");
    ins.bind(1, message.request_id).bind(2, to_string(message.msg_type));
    ins.bind(3, join_ids(message.content_ids)).bind(4, message.dedup_key).bind(5, now);
    ins.exec();
    return sqlite3_last_insert_rowid(impl_->db_);
  });
}

std::pair<std::int64_t, bool> Catalog::record_message_binding_contents(Message& message,
                                                                       Timestamp now) {
  if (message.status != MessageStatus::New) {
    throw Error(ErrorCode::InvalidArgument, "record_message requires status=new");
  }
  if (message.content_ids.empty()) {
    throw Error(ErrorCode::InvalidArgument, "binding message needs content ids");
  }
  return impl_->transact([&]() -> std::pair<std::int64_t, bool> {
    {
      Stmt find(impl_->db_, "SELECT msg_id,status FROM messages WHERE dedup_key=?");
      find.bind(1, message.dedup_key);
      if (find.row()) {
        message.msg_id = find.col_int(0);
        message.status = message_status_from_string(find.col_text(1));
        return {message.msg_id, false};
      }
    }
    Stmt ins(impl_->db_, "INSERT INTO messages(request_id,msg_type,content_ids,dedup_key,status,"
                         "created_at) VALUES(?,?,?,?,'new',?)");
    ins.bind(1, message.request_id).bind(2, to_string(message.msg_type));
    ins.bind(3, join_ids(message.content_ids)).bind(4, message.dedup_key).bind(5, now);
    ins.exec();
    message.msg_id = sqlite3_last_insert_rowid(impl_->db_);
    message.created_at = now;
    for (std::int64_t content_id : message.content_ids) {
      Content c = impl_->fetch_content(content_id);
      if (c.status != ContentStatus::Available) {
        throw Error(ErrorCode::IllegalState,
                    "content " + std::to_string(content_id) + " is not available");
      }
      impl_->apply_content_status(c, ContentStatus::Delivering, now);
    }
    return {message.msg_id, true};
  });
}

void Catalog::mark_message(std::int64_t msg_id, MessageStatus new_status, Timestamp now) {
  impl_->transact([&] {
    Message m = impl_->fetch_message(msg_id);
    bool ok = (m.status == MessageStatus::New && new_status == MessageStatus::Sent) ||
              (m.status == MessageStatus::Sent && new_status == MessageStatus::Acked);
    if (!ok) {
      throw Error(ErrorCode::IllegalTransition,
                  "message " + to_string(m.status) + " -> " + to_string(new_status));
    }
    Stmt u(impl_->db_, "UPDATE messages SET status=? WHERE msg_id=?");
    u.bind(1, to_string(new_status)).bind(2, msg_id);
    u.exec();
    impl_->log_transition(ItemKind::Message, msg_id, to_string(m.status), to_string(new_status),
                          now);
  });
}

Message Catalog::get_message(std::int64_t msg_id) const {
  return impl_->read([&] { return impl_->fetch_message(msg_id); });
}

std::vector<Message> Catalog::messages_of_request(std::int64_t request_id,
                                                  std::optional<MessageStatus> status) const {
  return impl_->read([&] {
    std::vector<Message> out;
    std::string sql = std::string("SELECT ") + Impl::kMessageCols + " FROM messages WHERE request_id=?";
    if (status) sql += " AND status=?";
    sql += " ORDER BY msg_id ASC";
    Stmt s(impl_->db_, sql);
    s.bind(1, request_id);
    if (status) s.bind(2, to_string(*status));
    while (s.row()) out.push_back(impl_->read_message_row(s));
    return out;
  });
}

std::vector<std::int64_t> Catalog::acked_message_ids() const {
  return impl_->read([&] {
    std::vector<std::int64_t> out;
    Stmt s(impl_->db_, "SELECT msg_id FROM messages WHERE status='acked' ORDER BY msg_id ASC");
    while (s.row()) out.push_back(s.col_int(0));
    return out;
  });
}

void Catalog::record_heartbeat(const std::string& agent_kind, const std::string& agent_id,
                               Timestamp now) {
  impl_->transact([&] {
    Stmt s(impl_->db_,
           "INSERT OR REPLACE INTO heartbeats(agent_kind,agent_id,last_beat) VALUES(?,?,?)");
    s.bind(1, agent_kind).bind(2, agent_id).bind(3, now);
    s.exec();
  });
}

std::map<std::string, Timestamp> Catalog::heartbeats() const {
  return impl_->read([&] {
    std::map<std::string, Timestamp> out;
    Stmt s(impl_->db_, "SELECT agent_kind,last_beat FROM heartbeats");
    while (s.row()) out[s.col_text(0)] = s.col_double(1);
    return out;
  });
}

namespace {

json request_to_json_row(const Request& r) {
  return json{{"request_id", r.request_id},
              {"scope", r.scope},
              {"name", r.name},
              {"request_type", to_string(r.request_type)},
              {"transform_tag", r.transform_tag},
              {"granularity", to_string(r.granularity)},
              {"chunk_size", r.chunk_size},
              {"priority", r.priority},
              {"status", to_string(r.status)},
              {"created_at", r.created_at},
              {"updated_at", r.updated_at},
              {"lifetime_seconds", r.lifetime_seconds},
              {"metadata", r.metadata},
              {"version", r.version}};
}

json collection_to_json_row(const Collection& c) {
  return json{{"collection_id", c.collection_id},
              {"request_id", c.request_id},
              {"relation", to_string(c.relation)},
              {"scope", c.scope},
              {"name", c.name},
              {"total_contents", c.total_contents},
              {"available_contents", c.available_contents},
              {"delivered_contents", c.delivered_contents},
              {"status", to_string(c.status)},
              {"version", c.version}};
}

json content_to_json_row(const Content& c) {
  json j{{"content_id", c.content_id},
         {"collection_id", c.collection_id},
         {"scope", c.scope},
         {"name", c.name},
         {"min_id", c.min_id},
         {"max_id", c.max_id},
         {"status", to_string(c.status)},
         {"size_bytes", c.size_bytes},
         {"checksum", c.checksum},
         {"locator", c.locator},
         {"version", c.version}};
  if (c.parent_content_id) {
    j["parent_content_id"] = *c.parent_content_id;
  } else {
    j["parent_content_id"] = nullptr;
  }
  return j;
}

}  // namespace

nlohmann::json Catalog::dump_snapshot() const {
  return impl_->read([&] {
    json snap;
    snap["schema_version"] = 1;
    snap["requests"] = json::array();
    {
      Stmt s(impl_->db_,
             std::string("SELECT ") + Impl::kRequestCols + " FROM requests ORDER BY request_id");
      while (s.row()) snap["requests"].push_back(request_to_json_row(impl_->read_request_row(s)));
    }
    snap["collections"] = json::array();
    {
      Stmt s(impl_->db_, std::string("SELECT ") + Impl::kCollectionCols +
                             " FROM collections ORDER BY collection_id");
      while (s.row()) {
        snap["collections"].push_back(collection_to_json_row(impl_->read_collection_row(s)));
      }
    }
    snap["contents"] = json::array();
    {
      Stmt s(impl_->db_,
             std::string("SELECT ") + Impl::kContentCols + " FROM contents ORDER BY content_id");
      while (s.row()) snap["contents"].push_back(content_to_json_row(impl_->read_content_row(s)));
    }
    snap["transforms"] = json::array();
    {
      Stmt s(impl_->db_, "SELECT transform_id,request_id,transform_tag,status,retries,max_retries,"
                         "version FROM transforms ORDER BY transform_id");
      while (s.row()) {
        Transform t = impl_->read_transform_row(s);
        snap["transforms"].push_back(json{{"transform_id", t.transform_id},
                                          {"request_id", t.request_id},
                                          {"transform_tag", t.transform_tag},
                                          {"status", to_string(t.status)},
                                          {"retries", t.retries},
                                          {"max_retries", t.max_retries},
                                          {"version", t.version}});
      }
    }
    snap["messages"] = json::array();
    {
      Stmt s(impl_->db_,
             std::string("SELECT ") + Impl::kMessageCols + " FROM messages ORDER BY msg_id");
      while (s.row()) {
        Message m = impl_->read_message_row(s);
        snap["messages"].push_back(json{{"msg_id", m.msg_id},
                                        {"request_id", m.request_id},
                                        {"msg_type", to_string(m.msg_type)},
                                        {"content_ids", m.content_ids},
                                        {"dedup_key", m.dedup_key},
                                        {"status", to_string(m.status)},
                                        {"created_at", m.created_at}});
      }
    }
    snap["claims"] = json::array();
    {
      Stmt s(impl_->db_, "SELECT item_kind,item_id,agent_id,claimed_at,lease_seconds FROM claims"
                         " ORDER BY item_kind,item_id");
      while (s.row()) {
        snap["claims"].push_back(json{{"item_kind", s.col_text(0)},
                                      {"item_id", s.col_int(1)},
                                      {"agent_id", s.col_text(2)},
                                      {"claimed_at", s.col_double(3)},
                                      {"lease_seconds", s.col_int(4)}});
      }
    }
    snap["heartbeats"] = json::array();
    {
      Stmt s(impl_->db_, "SELECT agent_kind,agent_id,last_beat FROM heartbeats ORDER BY agent_kind");
      while (s.row()) {
        snap["heartbeats"].push_back(json{{"agent_kind", s.col_text(0)},
                                          {"agent_id", s.col_text(1)},
                                          {"last_beat", s.col_double(2)}});
      }
    }
    return snap;
  });
}

std::uint64_t Catalog::domain_state_hash() const {
  json snap = dump_snapshot();
  snap.erase("claims");
  snap.erase("heartbeats");
  std::string text = snap.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::int64_t> Catalog::audit_counters() const {
  return impl_->read([&] {
    std::vector<std::int64_t> mismatched;
    std::vector<Collection> collections;
    {
      Stmt s(impl_->db_, std::string("SELECT ") + Impl::kCollectionCols +
                             " FROM collections ORDER BY collection_id");
      while (s.row()) collections.push_back(impl_->read_collection_row(s));
    }
    for (const Collection& coll : collections) {
      std::vector<ContentStatus> statuses;
      Stmt s(impl_->db_, "SELECT status FROM contents WHERE collection_id=?");
      s.bind(1, coll.collection_id);
      while (s.row()) statuses.push_back(content_status_from_string(s.col_text(0)));
      CollectionCounters c = derive_collection_counters(statuses);
      if (c.total != coll.total_contents || c.available != coll.available_contents ||
          c.delivered != coll.delivered_contents) {
        mismatched.push_back(coll.collection_id);
      }
    }
    return mismatched;
  });
}

std::vector<TransitionRecord> Catalog::transition_log() const {
  return impl_->read([&] { return impl_->transitions_; });
}

}  // namespace granule
