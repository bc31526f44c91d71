public static String encryptMessage(String message, String key) {
    StringBuilder encrypted = new StringBuilder();
    for (int i = 0; i < message.length(); i++) {
        char c = message.charAt(i);
        char k = key.charAt(i % key.length());
        encrypted.append((char)(c + k));
    }
    return encrypted.toString();
}
