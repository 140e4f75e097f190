/** Demo fixtures: one profile and one tick of readings for a fresh session. */

export const DEMO_PROFILE = {
  user_id: "panel-demo",
  activity_speed_baselines: { jogging: 13.0, walking: 5.0 },
  resting_bpm: 60,
  friend_device_ids: ["bt-lena", "bt-marco"],
  home_timezone: "Australia/Sydney",
};

export const DEMO_READINGS = [
  { source_id: "phone_accel", ts: 55, payload: { motion_signature: { label: "jogging_pattern", confidence: 0.9 } } },
  { source_id: "phone_gps", ts: 55, quality: 0.95, payload: { position: { lat: -33.8688, lon: 151.2093, speed_kmh: 15.0 } } },
  { source_id: "phone_bt", ts: 50, quality: 0.9, payload: { peer_list: { device_ids: ["bt-stranger-41"] } } },
  { source_id: "phone_mic", ts: 50, payload: { voice_presence: { present: false, confidence: 0.8 } } },
  { source_id: "phone_moisture", ts: 52, payload: { moisture_level: { value: 0.8 } } },
  { source_id: "phone_clock", ts: 56, payload: { local_time: { value: "23:56" } } },
  { source_id: "bracelet_hr", ts: 54, quality: 0.9, payload: { bpm: { value: 130 } } },
  { source_id: "chest_resp", ts: 54, payload: { respiration_label: { value: "labored" } } },
  { source_id: "front_camera", ts: 58, payload: { emotion_label: { label: "angry", confidence: 0.85 } } },
  { source_id: "social_feed", ts: 57, payload: { sentiment_label: { label: "angry", confidence: 0.7 } } },
  { source_id: "calendar", ts: 45, payload: { calendar_entry: { activity: "jogging", place: "downtown", from_ts: 0, to_ts: 3600 } } },
  { source_id: "weather_stub", ts: 56, payload: { weather_label: { label: "heavy_rain", confidence: 0.7 } } },
  { source_id: "place_stub", ts: 53, quality: 0.9, payload: { place_label: { name: "downtown of Sydney", category: "downtown" } } },
];
